#pragma once

#include <stdexcept>
#include <string>

namespace secmarl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SECMARL_ERROR(NAME)                              \
    struct NAME : Error {                                \
        explicit NAME(const std::string& msg = #NAME)    \
            : Error(std::string(#NAME) + ": " + msg) {}  \
    }

// algebra
SECMARL_ERROR(RangeOverflow);
SECMARL_ERROR(NonFinite);
SECMARL_ERROR(ZeroInverse);
SECMARL_ERROR(DuplicatePoint);

// shamir
SECMARL_ERROR(BadThreshold);
SECMARL_ERROR(InsufficientShares);
SECMARL_ERROR(MixedDegree);
SECMARL_ERROR(IndexMismatch);
SECMARL_ERROR(ReusedRandomness);
SECMARL_ERROR(InsufficientParties);

// additive 2pc / nn
SECMARL_ERROR(DimMismatch);
SECMARL_ERROR(TripleExhausted);
SECMARL_ERROR(ChannelDesync);
SECMARL_ERROR(DealerUnavailable);
SECMARL_ERROR(SideConflict);
SECMARL_ERROR(TraceMismatch);
SECMARL_ERROR(ShapeMismatch);

// transport
SECMARL_ERROR(Truncated);
SECMARL_ERROR(BadType);
SECMARL_ERROR(SeqGap);
SECMARL_ERROR(DimHeaderMismatch);

// maddpg / env
SECMARL_ERROR(BufferTooSmall);
SECMARL_ERROR(IndexOutOfRange);
SECMARL_ERROR(EmptyHistory);
SECMARL_ERROR(NegativeState);

// expcli
SECMARL_ERROR(ParseError);
SECMARL_ERROR(ValidationError);
SECMARL_ERROR(LengthMismatch);
SECMARL_ERROR(EmptySeries);

#undef SECMARL_ERROR

}  // namespace secmarl
