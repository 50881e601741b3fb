#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "secmarl/errors.h"

namespace secmarl {

// Wire contract, fixed: 4-byte big-endian payload length, 1-byte message
// type, 4-byte big-endian session sequence number, payload. Sequence numbers
// start at 0 and increase by one per frame per direction. Numeric payload
// words are little-endian; dimension headers inside payloads are big-endian.
enum class MsgType : std::uint8_t {
    Hello = 0,
    IndexSet = 1,
    ShareMatrix = 2,
    OpenReq = 3,
    OpenVal = 4,
    Triple = 5,
    NonlinReq = 6,
    NonlinResp = 7,
    Bye = 8,
};

constexpr std::size_t kFrameHeaderSize = 9;
constexpr std::size_t kDefaultMaxPayload = 64ull << 20;

struct Frame {
    MsgType type = MsgType::Hello;
    std::uint32_t seq = 0;
    std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_frame(const Frame& f);

// Decodes one frame from the front of `bytes`; *consumed is set to the number
// of bytes used so callers can keep the remainder for the next frame. Throws
// Truncated when the buffer does not hold a complete frame and BadType for an
// unknown message type.
Frame decode_frame(const std::vector<std::uint8_t>& bytes, std::size_t* consumed,
                   std::size_t max_payload = kDefaultMaxPayload);

struct ChannelStats {
    std::uint64_t bytes_sent = 0;
    std::uint64_t bytes_recv = 0;
    std::uint64_t frames_sent = 0;
    std::uint64_t frames_recv = 0;
    std::uint64_t open_rounds = 0;      // party-to-party value openings
    std::uint64_t opened_matrices = 0;  // matrices revealed by those openings
    std::map<std::string, std::uint64_t> tag_bytes;  // per gadget call site
};

// One framed, FIFO, sequence-checked connection endpoint. A channel is used
// by a single logical protocol thread; stats snapshots may come from others.
class Channel {
  public:
    virtual ~Channel() = default;

    void send(MsgType type, std::vector<std::uint8_t> payload);
    Frame recv();
    // recv that insists on a message type
    Frame expect(MsgType type);

    void hello(std::vector<std::uint8_t> payload = {});  // send + await the opening frame
    void bye();                                          // send + await the closing frame

    // server-side half of the handshake: read the peer's HELLO (returning its
    // payload) and answer with our own
    std::vector<std::uint8_t> accept_hello();

    ChannelStats stats_snapshot() const;
    void set_tag(const std::string& tag);
    void count_open_round(std::uint64_t matrices);

    void set_timeout_ms(int ms) { timeout_ms_ = ms; }

  protected:
    virtual void write_bytes(const std::uint8_t* data, std::size_t len) = 0;
    // appends at least one byte to buf or times out (return false)
    virtual bool read_some(std::vector<std::uint8_t>& buf, int timeout_ms) = 0;

    int timeout_ms_ = 30000;

  private:
    void account_send(const std::string& dir_tag, std::size_t n);

    std::vector<std::uint8_t> rx_buf_;
    std::uint32_t next_send_seq_ = 0;
    std::uint32_t next_recv_seq_ = 0;
    bool hello_sent_ = false;
    bool hello_recvd_ = false;
    bool bye_sent_ = false;
    bool bye_recvd_ = false;

    mutable std::mutex stats_mu_;
    ChannelStats stats_;
    std::string tag_ = "untagged";
};

// In-process loopback: two endpoints over shared FIFO queues, same frame
// semantics as TCP. Safe for one thread per endpoint.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> loopback_pair();

// Blocking TCP with the same framing. Addresses are "host:port".
std::unique_ptr<Channel> tcp_connect(const std::string& addr, int attempts = 40,
                                     int retry_ms = 250);

class TcpListener {
  public:
    explicit TcpListener(const std::string& addr);  // "host:port", port 0 = ephemeral
    ~TcpListener();
    std::unique_ptr<Channel> accept_one();
    int port() const { return port_; }

  private:
    int fd_ = -1;
    int port_ = 0;
};

// payload helpers (little-endian words, big-endian dims)
void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64le(std::vector<std::uint8_t>& out, std::uint64_t v);
std::uint32_t get_u32be(const std::vector<std::uint8_t>& in, std::size_t& pos);
std::uint64_t get_u64le(const std::vector<std::uint8_t>& in, std::size_t& pos);

}  // namespace secmarl
