#include "secmarl/transport.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <thread>

namespace secmarl {

void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32be(const std::vector<std::uint8_t>& in, std::size_t& pos) {
    if (pos + 4 > in.size()) throw Truncated("u32be");
    std::uint32_t v = (static_cast<std::uint32_t>(in[pos]) << 24) |
                      (static_cast<std::uint32_t>(in[pos + 1]) << 16) |
                      (static_cast<std::uint32_t>(in[pos + 2]) << 8) |
                      static_cast<std::uint32_t>(in[pos + 3]);
    pos += 4;
    return v;
}

std::uint64_t get_u64le(const std::vector<std::uint8_t>& in, std::size_t& pos) {
    if (pos + 8 > in.size()) throw Truncated("u64le");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
    pos += 8;
    return v;
}

std::vector<std::uint8_t> encode_frame(const Frame& f) {
    std::vector<std::uint8_t> out;
    out.reserve(kFrameHeaderSize + f.payload.size());
    put_u32be(out, static_cast<std::uint32_t>(f.payload.size()));
    out.push_back(static_cast<std::uint8_t>(f.type));
    put_u32be(out, f.seq);
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    return out;
}

Frame decode_frame(const std::vector<std::uint8_t>& bytes, std::size_t* consumed,
                   std::size_t max_payload) {
    if (bytes.size() < kFrameHeaderSize) throw Truncated("frame header");
    std::size_t pos = 0;
    const std::uint32_t len = get_u32be(bytes, pos);
    if (len > max_payload) throw Truncated("payload length exceeds limit");
    const std::uint8_t raw_type = bytes[pos++];
    if (raw_type > static_cast<std::uint8_t>(MsgType::Bye)) throw BadType("msg_type");
    Frame f;
    f.type = static_cast<MsgType>(raw_type);
    f.seq = get_u32be(bytes, pos);
    if (bytes.size() < kFrameHeaderSize + len) throw Truncated("frame payload");
    f.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
    if (consumed) *consumed = kFrameHeaderSize + len;
    return f;
}

void Channel::send(MsgType type, std::vector<std::uint8_t> payload) {
    if (bye_sent_) throw BadType("send after BYE");
    if (!hello_sent_ && type != MsgType::Hello) throw BadType("first frame must be HELLO");
    Frame f;
    f.type = type;
    f.seq = next_send_seq_++;
    f.payload = std::move(payload);
    const auto bytes = encode_frame(f);
    write_bytes(bytes.data(), bytes.size());
    if (type == MsgType::Hello) hello_sent_ = true;
    if (type == MsgType::Bye) bye_sent_ = true;
    std::lock_guard<std::mutex> lk(stats_mu_);
    stats_.bytes_sent += bytes.size();
    stats_.frames_sent += 1;
    stats_.tag_bytes[tag_] += bytes.size();
}

Frame Channel::recv() {
    if (bye_recvd_) throw BadType("recv after BYE");
    for (;;) {
        if (rx_buf_.size() >= kFrameHeaderSize) {
            std::size_t pos = 0;
            const std::uint32_t len = get_u32be(rx_buf_, pos);
            if (len > kDefaultMaxPayload) throw Truncated("payload length exceeds limit");
            if (rx_buf_.size() >= kFrameHeaderSize + len) break;
        }
        if (!read_some(rx_buf_, timeout_ms_)) throw ChannelDesync("recv timeout");
    }
    std::size_t consumed = 0;
    Frame f = decode_frame(rx_buf_, &consumed);
    rx_buf_.erase(rx_buf_.begin(), rx_buf_.begin() + static_cast<std::ptrdiff_t>(consumed));
    if (f.seq != next_recv_seq_) throw SeqGap("expected " + std::to_string(next_recv_seq_) +
                                              " got " + std::to_string(f.seq));
    ++next_recv_seq_;
    if (!hello_recvd_ && f.type != MsgType::Hello) throw BadType("first frame must be HELLO");
    if (f.type == MsgType::Hello) hello_recvd_ = true;
    if (f.type == MsgType::Bye) bye_recvd_ = true;
    std::lock_guard<std::mutex> lk(stats_mu_);
    stats_.bytes_recv += consumed;
    stats_.frames_recv += 1;
    return f;
}

Frame Channel::expect(MsgType type) {
    Frame f = recv();
    if (f.type != type) throw ChannelDesync("expected msg type mismatch");
    return f;
}

void Channel::hello(std::vector<std::uint8_t> payload) {
    send(MsgType::Hello, std::move(payload));
    expect(MsgType::Hello);
}

std::vector<std::uint8_t> Channel::accept_hello() {
    Frame f = expect(MsgType::Hello);
    send(MsgType::Hello, {});
    return f.payload;
}

void Channel::bye() {
    send(MsgType::Bye, {});
    expect(MsgType::Bye);
}

ChannelStats Channel::stats_snapshot() const {
    std::lock_guard<std::mutex> lk(stats_mu_);
    return stats_;
}

void Channel::set_tag(const std::string& tag) {
    std::lock_guard<std::mutex> lk(stats_mu_);
    tag_ = tag;
}

void Channel::count_open_round(std::uint64_t matrices) {
    std::lock_guard<std::mutex> lk(stats_mu_);
    stats_.open_rounds += 1;
    stats_.opened_matrices += matrices;
}

namespace {

struct LoopbackQueue {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::uint8_t> bytes;
    bool closed = false;
};

class LoopbackChannel final : public Channel {
  public:
    LoopbackChannel(std::shared_ptr<LoopbackQueue> tx, std::shared_ptr<LoopbackQueue> rx)
        : tx_(std::move(tx)), rx_(std::move(rx)) {}

    ~LoopbackChannel() override {
        std::lock_guard<std::mutex> lk(tx_->mu);
        tx_->closed = true;
        tx_->cv.notify_all();
    }

  protected:
    void write_bytes(const std::uint8_t* data, std::size_t len) override {
        std::lock_guard<std::mutex> lk(tx_->mu);
        tx_->bytes.insert(tx_->bytes.end(), data, data + len);
        tx_->cv.notify_all();
    }

    bool read_some(std::vector<std::uint8_t>& buf, int timeout_ms) override {
        std::unique_lock<std::mutex> lk(rx_->mu);
        if (!rx_->cv.wait_for(lk, std::chrono::milliseconds(timeout_ms),
                              [&] { return !rx_->bytes.empty() || rx_->closed; }))
            return false;
        if (rx_->bytes.empty()) return false;  // closed and drained
        buf.insert(buf.end(), rx_->bytes.begin(), rx_->bytes.end());
        rx_->bytes.clear();
        return true;
    }

  private:
    std::shared_ptr<LoopbackQueue> tx_;
    std::shared_ptr<LoopbackQueue> rx_;
};

class TcpChannel final : public Channel {
  public:
    explicit TcpChannel(int fd) : fd_(fd) {
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    }
    ~TcpChannel() override {
        if (fd_ >= 0) ::close(fd_);
    }

  protected:
    void write_bytes(const std::uint8_t* data, std::size_t len) override {
        std::size_t off = 0;
        while (off < len) {
            const ssize_t n = ::send(fd_, data + off, len - off, MSG_NOSIGNAL);
            if (n <= 0) throw ChannelDesync("tcp send failed");
            off += static_cast<std::size_t>(n);
        }
    }

    bool read_some(std::vector<std::uint8_t>& buf, int timeout_ms) override {
        timeval tv;
        tv.tv_sec = timeout_ms / 1000;
        tv.tv_usec = (timeout_ms % 1000) * 1000;
        ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
        std::uint8_t tmp[16384];
        const ssize_t n = ::recv(fd_, tmp, sizeof(tmp), 0);
        if (n <= 0) return false;
        buf.insert(buf.end(), tmp, tmp + n);
        return true;
    }

  private:
    int fd_;
};

sockaddr_in parse_addr(const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw ValidationError("address must be host:port");
    const std::string host = addr.substr(0, colon);
    const int port = std::stoi(addr.substr(colon + 1));
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1)
        throw ValidationError("bad host: " + host);
    return sa;
}

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> loopback_pair() {
    auto q_ab = std::make_shared<LoopbackQueue>();
    auto q_ba = std::make_shared<LoopbackQueue>();
    return {std::make_unique<LoopbackChannel>(q_ab, q_ba),
            std::make_unique<LoopbackChannel>(q_ba, q_ab)};
}

std::unique_ptr<Channel> tcp_connect(const std::string& addr, int attempts, int retry_ms) {
    const sockaddr_in sa = parse_addr(addr);
    for (int i = 0; i < attempts; ++i) {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw ChannelDesync("socket() failed");
        if (::connect(fd, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) == 0)
            return std::make_unique<TcpChannel>(fd);
        ::close(fd);
        std::this_thread::sleep_for(std::chrono::milliseconds(retry_ms));
    }
    throw ChannelDesync("connect to " + addr + " failed");
}

TcpListener::TcpListener(const std::string& addr) {
    const sockaddr_in sa = parse_addr(addr);
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw ChannelDesync("socket() failed");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0) {
        ::close(fd_);
        throw ChannelDesync("bind " + addr + " failed");
    }
    if (::listen(fd_, 8) != 0) {
        ::close(fd_);
        throw ChannelDesync("listen failed");
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Channel> TcpListener::accept_one() {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) throw ChannelDesync("accept failed");
    return std::make_unique<TcpChannel>(fd);
}

}  // namespace secmarl
