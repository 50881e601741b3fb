#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <thread>

#include "secmarl/sharemat.h"
#include "secmarl/transport.h"

using namespace secmarl;

TEST_CASE("empty HELLO frame roundtrips") {
    Frame f;
    f.type = MsgType::Hello;
    f.seq = 0;
    const auto bytes = encode_frame(f);
    CHECK(bytes.size() == kFrameHeaderSize);
    std::size_t consumed = 0;
    const Frame back = decode_frame(bytes, &consumed);
    CHECK(consumed == bytes.size());
    CHECK(back.type == MsgType::Hello);
    CHECK(back.seq == 0);
    CHECK(back.payload.empty());
}

TEST_CASE("random frames roundtrip byte-exact with trailing data preserved") {
    Rng rng(21);
    for (int i = 0; i < 1000; ++i) {
        Frame f;
        f.type = static_cast<MsgType>(rng.next_below(9));
        f.seq = static_cast<std::uint32_t>(rng.next_u64());
        f.payload.resize(rng.next_below(4096));
        for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng.next_u64());

        auto bytes = encode_frame(f);
        const std::size_t tail = rng.next_below(16);
        for (std::size_t k = 0; k < tail; ++k)
            bytes.push_back(static_cast<std::uint8_t>(rng.next_u64()));

        std::size_t consumed = 0;
        const Frame back = decode_frame(bytes, &consumed);
        CHECK(consumed == bytes.size() - tail);
        CHECK(back.type == f.type);
        CHECK(back.seq == f.seq);
        CHECK(back.payload == f.payload);
    }
}

TEST_CASE("decode errors: truncation and unknown type") {
    Frame f;
    f.type = MsgType::OpenVal;
    f.seq = 3;
    f.payload = {1, 2, 3, 4};
    auto bytes = encode_frame(f);

    // corrupted length field claiming more payload than present
    auto corrupted = bytes;
    corrupted[3] = 200;
    std::size_t consumed = 0;
    CHECK_THROWS_AS(decode_frame(corrupted, &consumed), Truncated);

    // short buffer
    auto shortened = bytes;
    shortened.resize(kFrameHeaderSize - 2);
    CHECK_THROWS_AS(decode_frame(shortened, &consumed), Truncated);

    // unknown message type
    auto badtype = bytes;
    badtype[4] = 99;
    CHECK_THROWS_AS(decode_frame(badtype, &consumed), BadType);

    // absurd length field
    auto huge = bytes;
    huge[0] = 0xFF;
    CHECK_THROWS_AS(decode_frame(huge, &consumed), Truncated);
}

TEST_CASE("loopback ping-pong HELLO then BYE") {
    auto [a, b] = loopback_pair();
    std::thread peer([&] {
        b->accept_hello();
        const Frame f = b->recv();
        CHECK(f.type == MsgType::Bye);
        b->send(MsgType::Bye, {});
    });
    a->hello();
    a->bye();
    peer.join();
    const auto st = a->stats_snapshot();
    CHECK(st.frames_sent == 2);
    CHECK(st.frames_recv == 2);
}

TEST_CASE("first frame must be HELLO") {
    auto [a, b] = loopback_pair();
    CHECK_THROWS_AS(a->send(MsgType::OpenVal, {}), BadType);
}

namespace {

// byte-level channel exposing its receive buffer so frames can be dropped or
// reordered to provoke sequence errors
class ScriptedChannel final : public Channel {
  public:
    std::vector<std::uint8_t> inbox;

    void push_frame(const Frame& f) {
        const auto b = encode_frame(f);
        inbox.insert(inbox.end(), b.begin(), b.end());
    }

  protected:
    void write_bytes(const std::uint8_t*, std::size_t) override {}
    bool read_some(std::vector<std::uint8_t>& buf, int) override {
        if (inbox.empty()) return false;
        buf.insert(buf.end(), inbox.begin(), inbox.end());
        inbox.clear();
        return true;
    }
};

}  // namespace

TEST_CASE("sequence gap surfaces as SeqGap, not silent reordering") {
    ScriptedChannel ch;
    ch.push_frame({MsgType::Hello, 0, {}});
    ch.push_frame({MsgType::OpenVal, 2, {}});  // seq 1 went missing
    CHECK(ch.recv().type == MsgType::Hello);
    CHECK_THROWS_AS(ch.recv(), SeqGap);
}

TEST_CASE("interleaved session rejected by the seq check") {
    ScriptedChannel ch;
    ch.push_frame({MsgType::Hello, 0, {}});
    ch.push_frame({MsgType::OpenVal, 1, {}});
    ch.push_frame({MsgType::Hello, 0, {}});  // a second session butting in
    CHECK(ch.recv().type == MsgType::Hello);
    CHECK(ch.recv().type == MsgType::OpenVal);
    CHECK_THROWS_AS(ch.recv(), SeqGap);
}

TEST_CASE("recv timeout raises ChannelDesync") {
    auto [a, b] = loopback_pair();
    a->set_timeout_ms(50);
    std::thread peer([&] { b->accept_hello(); });
    a->hello();
    peer.join();
    CHECK_THROWS_AS(a->recv(), ChannelDesync);
}

TEST_CASE("share matrix roundtrips") {
    auto [a, b] = loopback_pair();
    std::thread peer([&] {
        b->accept_hello();
        const ShareMatrix one = recv_share_matrix(*b, 1);
        CHECK(one.rows == 1);
        CHECK(one.cols == 1);
        CHECK(one.v[0] == 42);
        const ShareMatrix empty = recv_share_matrix(*b, 1);
        CHECK(empty.rows == 0);
        CHECK(empty.cols == 5);
        CHECK(empty.v.empty());
    });
    a->hello();
    ShareMatrix one(1, 1, 0);
    one.v[0] = 42;
    send_share_matrix(one, *a);
    send_share_matrix(ShareMatrix(0, 5, 0), *a);  // degenerate 0 x n
    peer.join();
}

TEST_CASE("dim header mismatch rejected") {
    ShareMatrix m(2, 2, 0);
    auto payload = share_matrix_payload(m);
    payload.pop_back();
    CHECK_THROWS_AS(share_matrix_from_payload(payload, 0), DimHeaderMismatch);
}

TEST_CASE("random 16x16 matrix identical over loopback and TCP") {
    Rng rng(33);
    ShareMatrix m(16, 16, 0);
    for (auto& w : m.v) w = rng.next_u64();

    ShareMatrix via_loopback, via_tcp;
    {
        auto [a, b] = loopback_pair();
        std::thread peer([&] {
            b->accept_hello();
            via_loopback = recv_share_matrix(*b, 0);
        });
        a->hello();
        send_share_matrix(m, *a);
        peer.join();
    }
    {
        TcpListener listener("127.0.0.1:0");
        std::thread peer([&] {
            auto server = listener.accept_one();
            server->accept_hello();
            via_tcp = recv_share_matrix(*server, 0);
            server->expect(MsgType::Bye);
            server->send(MsgType::Bye, {});
        });
        auto client = tcp_connect("127.0.0.1:" + std::to_string(listener.port()));
        client->hello();
        send_share_matrix(m, *client);
        client->bye();
        peer.join();
    }
    CHECK(via_loopback.v == m.v);
    CHECK(via_tcp.v == m.v);
}

TEST_CASE("fresh channel stats are all zeros") {
    auto [a, b] = loopback_pair();
    const auto st = a->stats_snapshot();
    CHECK(st.bytes_sent == 0);
    CHECK(st.bytes_recv == 0);
    CHECK(st.frames_sent == 0);
    CHECK(st.frames_recv == 0);
    CHECK(st.open_rounds == 0);
    CHECK(st.tag_bytes.empty());
}

TEST_CASE("f64 matrices ride the wire bit-exact") {
    auto [a, b] = loopback_pair();
    Rng rng(55);
    Mat m = Mat::random_uniform(3, 7, -1e9, 1e9, rng);
    std::thread peer([&] {
        b->accept_hello();
        const Mat got = recv_mat(*b);
        CHECK(got.a == m.a);
    });
    a->hello();
    send_mat(m, *a);
    peer.join();
}
