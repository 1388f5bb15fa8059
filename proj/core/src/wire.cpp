#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <istream>
#include <ostream>

#include "triage/errors.hpp"
#include "triage/evidence_api.hpp"

namespace triage {

using json = nlohmann::json;

void write_frame(std::ostream& out, std::string_view payload) {
  out << payload.size() << '\n';
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  out.flush();
}

std::optional<std::string> read_frame(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) return std::nullopt;
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::size_t len = 0;
  for (char c : header) {
    if (c < '0' || c > '9') return std::nullopt;
    len = len * 10 + static_cast<std::size_t>(c - '0');
    if (len > 64 * 1024 * 1024) return std::nullopt;  // frame cap
  }
  std::string payload(len, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(len));
  if (static_cast<std::size_t>(in.gcount()) != len) return std::nullopt;
  return payload;
}

void serve_stream(const EvidenceApi& api, std::istream& in, std::ostream& out) {
  while (auto frame = read_frame(in)) {
    json request = json::parse(*frame, nullptr, false);
    json response;
    if (request.is_discarded()) {
      response = json{{"request_id", nullptr},
                      {"error", json{{"code", static_cast<int>(ToolErrorCode::bad_params)},
                                     {"message", "request is not valid JSON"}}}};
    } else {
      response = api.handle(request);
    }
    write_frame(out, response.dump());
  }
}

namespace {

bool send_all(int fd, const char* data, std::size_t len) {
  while (len > 0) {
    ssize_t n = ::send(fd, data, len, 0);
    if (n <= 0) return false;
    data += n;
    len -= static_cast<std::size_t>(n);
  }
  return true;
}

bool write_frame_fd(int fd, std::string_view payload) {
  std::string header = std::to_string(payload.size()) + "\n";
  return send_all(fd, header.data(), header.size()) &&
         send_all(fd, payload.data(), payload.size());
}

std::optional<std::string> read_frame_fd(int fd) {
  std::string header;
  char c;
  while (true) {
    ssize_t n = ::recv(fd, &c, 1, 0);
    if (n <= 0) return std::nullopt;
    if (c == '\n') break;
    if (c == '\r') continue;
    if (c < '0' || c > '9') return std::nullopt;
    header.push_back(c);
    if (header.size() > 9) return std::nullopt;
  }
  if (header.empty()) return std::nullopt;
  std::size_t len = std::stoul(header);
  std::string payload(len, '\0');
  std::size_t got = 0;
  while (got < len) {
    ssize_t n = ::recv(fd, payload.data() + got, len - got, 0);
    if (n <= 0) return std::nullopt;
    got += static_cast<std::size_t>(n);
  }
  return payload;
}

}  // namespace

ToolServer::ToolServer(const EvidenceApi& api, const std::string& host, int port)
    : api_(api) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error("ToolServer: socket() failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw Error("ToolServer: bad listen address " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 16) != 0) {
    ::close(listen_fd_);
    throw Error("ToolServer: bind/listen failed on " + host + ":" + std::to_string(port));
  }
  sockaddr_in bound{};
  socklen_t blen = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &blen);
  port_ = ntohs(bound.sin_port);

  accept_thread_ = std::thread([this] { accept_loop(); });
}

void ToolServer::accept_loop() {
  while (!stopping_.load()) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_.load()) break;
      continue;
    }
    workers_.emplace_back([this, fd] {
      while (auto frame = read_frame_fd(fd)) {
        json request = json::parse(*frame, nullptr, false);
        json response;
        if (request.is_discarded()) {
          response = json{{"request_id", nullptr},
                          {"error", json{{"code", static_cast<int>(ToolErrorCode::bad_params)},
                                         {"message", "request is not valid JSON"}}}};
        } else {
          response = api_.handle(request);
        }
        if (!write_frame_fd(fd, response.dump())) break;
      }
      ::close(fd);
    });
  }
}

void ToolServer::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (accept_thread_.joinable()) accept_thread_.join();
  for (auto& w : workers_)
    if (w.joinable()) w.join();
}

ToolServer::~ToolServer() { stop(); }

json tool_roundtrip_tcp(const std::string& host, int port, const json& request) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error("tool client: socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1 ||
      ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw Error("tool client: connect failed");
  }
  bool ok = write_frame_fd(fd, request.dump());
  auto frame = ok ? read_frame_fd(fd) : std::nullopt;
  ::close(fd);
  if (!frame) throw Error("tool client: no response");
  return json::parse(*frame);
}

}  // namespace triage
