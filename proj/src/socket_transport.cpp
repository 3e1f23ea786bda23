#include "ftccl/socket_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <deque>

#include "ftccl/dufind.hpp"
#include "ftccl/wire.hpp"

namespace ftccl {

namespace {

using wire::put_le;
using wire::put_u8;

[[noreturn]] void sys_fail(const std::string& what) {
  throw IoError(what + ": " + std::strerror(errno));
}

void write_all(int fd, const std::byte* data, std::size_t len) {
  while (len > 0) {
    const ssize_t n = ::write(fd, data, len);
    if (n < 0) {
      if (errno == EINTR) continue;
      sys_fail("socket write");
    }
    data += n;
    len -= static_cast<std::size_t>(n);
  }
}

void send_frame(int fd, std::span<const std::byte> payload) {
  std::vector<std::byte> buf;
  buf.reserve(payload.size() + 4);
  append_frame(buf, payload);
  write_all(fd, buf.data(), buf.size());
}

/// Incremental frame decoder over a stream socket.
class FrameReader {
 public:
  explicit FrameReader(int fd) : fd_(fd) {}

  /// Reads whatever is available without blocking; returns false on EOF.
  bool pump() {
    for (;;) {
      std::byte chunk[65536];
      const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), MSG_DONTWAIT);
      if (n > 0) {
        buf_.insert(buf_.end(), chunk, chunk + n);
        continue;
      }
      if (n == 0) return false;
      if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
      if (errno == EINTR) continue;
      sys_fail("socket read");
    }
  }

  /// Pops one complete frame payload if present.
  bool next(std::vector<std::byte>& payload) {
    if (buf_.size() < 4) return false;
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i)
      len |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf_[i])) << (8 * i);
    if (buf_.size() < 4 + static_cast<std::size_t>(len)) return false;
    payload.assign(buf_.begin() + 4, buf_.begin() + 4 + len);
    buf_.erase(buf_.begin(), buf_.begin() + 4 + len);
    return true;
  }

 private:
  int fd_;
  std::deque<std::byte> buf_;
};

void wait_readable(int fd, int timeout_ms) {
  pollfd p{fd, POLLIN, 0};
  const int r = ::poll(&p, 1, timeout_ms);
  if (r < 0 && errno != EINTR) sys_fail("poll");
}

struct MsgFrame {
  RankId src;
  RankId dst;
  Message message;
};

std::vector<std::byte> encode_msg_frame(RankId src, RankId dst, const Message& m) {
  std::vector<std::byte> p;
  put_u8(p, static_cast<std::uint8_t>(FrameKind::Msg));
  put_le(p, src);
  put_le(p, dst);
  encode_message(m, p);
  return p;
}

MsgFrame decode_msg_frame(std::span<const std::byte> payload) {
  std::size_t off = 1;
  wire::Reader r{payload, off};
  MsgFrame f;
  f.src = r.le<RankId>();
  f.dst = r.le<RankId>();
  f.message = decode_message(payload, off);
  return f;
}

constexpr int kIdlePollMs = 50;

}  // namespace

void append_frame(std::vector<std::byte>& out, std::span<const std::byte> payload) {
  put_le(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
}

// ---------------------------------------------------------------------------
// Coordinator
// ---------------------------------------------------------------------------

namespace {

struct WorkerLink {
  int fd = -1;
  FrameReader reader{-1};
  std::uint64_t forwarded = 0;  // messages routed to this worker
  std::uint64_t processed = 0;  // last reported consumed count
  std::uint64_t rounds = 0;
  std::uint64_t msgs_sent = 0;
  bool idle = false;
  std::uint32_t confirm_seen = 0;
  bool changed = false;       // sync: last round's flag
  bool round_done = false;    // sync
  bool result_seen = false;
  std::map<ElementId, std::pair<ElementId, RankId>> parents;
};

std::vector<std::byte> encode_init(Mode mode, const GraphPartition& partition, RankId rank) {
  std::vector<std::byte> p;
  put_u8(p, static_cast<std::uint8_t>(FrameKind::Init));
  put_u8(p, static_cast<std::uint8_t>(mode));
  put_le(p, partition.num_ranks);
  put_le(p, rank);
  const auto& elements = partition.local_elements[rank];
  put_le(p, static_cast<std::uint64_t>(elements.size()));
  for (ElementId e : elements) put_le(p, e);
  const auto& edges = partition.local_edges[rank];
  put_le(p, static_cast<std::uint64_t>(edges.size()));
  for (const auto& e : edges) {
    put_le(p, e.a.id);
    put_le(p, e.a.rank);
    put_le(p, e.b.id);
    put_le(p, e.b.rank);
  }
  return p;
}

}  // namespace

SocketCclResult run_ccl_sockets(const GraphPartition& partition, Mode mode,
                                const std::string& exe_path) {
  const std::uint32_t num_ranks = partition.num_ranks;

  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) sys_fail("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    sys_fail("bind");
  socklen_t alen = sizeof(addr);
  if (::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &alen) != 0)
    sys_fail("getsockname");
  const std::uint16_t port = ntohs(addr.sin_port);
  if (::listen(listener, static_cast<int>(num_ranks)) != 0) sys_fail("listen");

  std::vector<pid_t> children;
  for (RankId r = 0; r < num_ranks; ++r) {
    const pid_t pid = ::fork();
    if (pid < 0) sys_fail("fork");
    if (pid == 0) {
      ::close(listener);
      ::execl(exe_path.c_str(), exe_path.c_str(), "_worker", "--port",
              std::to_string(port).c_str(), "--rank", std::to_string(r).c_str(),
              static_cast<char*>(nullptr));
      std::perror("exec worker");
      std::_Exit(127);
    }
    children.push_back(pid);
  }

  std::vector<WorkerLink> workers(num_ranks);
  for (std::uint32_t accepted = 0; accepted < num_ranks; ++accepted) {
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) sys_fail("accept");
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    // Hello identifies the worker's rank.
    FrameReader reader(fd);
    std::vector<std::byte> payload;
    while (!reader.next(payload)) {
      wait_readable(fd, -1);
      if (!reader.pump()) throw ProtocolError("worker closed before hello");
    }
    if (payload.empty() || payload[0] != static_cast<std::byte>(FrameKind::Hello))
      throw ProtocolError("expected hello frame");
    std::size_t off = 1;
    wire::Reader rd{payload, off};
    const RankId rank = rd.le<RankId>();
    if (rank >= num_ranks || workers[rank].fd != -1)
      throw ProtocolError("bad hello rank");
    workers[rank].fd = fd;
    workers[rank].reader = std::move(reader);
  }
  ::close(listener);

  for (RankId r = 0; r < num_ranks; ++r)
    send_frame(workers[r].fd, encode_init(mode, partition, r));

  auto route = [&workers](std::span<const std::byte> payload) {
    std::size_t off = 1;
    wire::Reader rd{payload, off};
    rd.le<RankId>();  // src
    const RankId dst = rd.le<RankId>();
    send_frame(workers[dst].fd, payload);
    ++workers[dst].forwarded;
  };

  std::uint32_t confirm_id = 0;
  bool confirm_outstanding = false;
  std::uint64_t confirm_forwarded_total = 0;
  std::uint32_t results = 0;
  std::uint64_t routed_this_round = 0;
  bool terminate_sent = false;

  std::vector<pollfd> fds(num_ranks);
  std::vector<std::byte> payload;
  while (results < num_ranks) {
    // poll ignores negative fds; workers that already reported are done.
    for (RankId r = 0; r < num_ranks; ++r)
      fds[r] = {workers[r].result_seen ? -1 : workers[r].fd, POLLIN, 0};
    if (::poll(fds.data(), fds.size(), 1000) < 0 && errno != EINTR) sys_fail("poll");

    for (RankId r = 0; r < num_ranks; ++r) {
      if (!(fds[r].revents & (POLLIN | POLLHUP))) continue;
      if (!workers[r].reader.pump() && !workers[r].result_seen && !terminate_sent)
        throw ProtocolError("worker " + std::to_string(r) + " exited early");
      while (workers[r].reader.next(payload)) {
        if (payload.empty()) throw ProtocolError("empty frame");
        switch (static_cast<FrameKind>(payload[0])) {
          case FrameKind::Msg: {
            ++workers[r].msgs_sent;
            ++routed_this_round;
            route(payload);
            break;
          }
          case FrameKind::Status: {
            std::size_t off = 1;
            wire::Reader rd{payload, off};
            workers[r].processed = rd.le<std::uint64_t>();
            workers[r].rounds = rd.le<std::uint64_t>();
            workers[r].idle = rd.u8() != 0;
            workers[r].confirm_seen = rd.le<std::uint32_t>();
            break;
          }
          case FrameKind::RoundDone: {
            std::size_t off = 1;
            wire::Reader rd{payload, off};
            workers[r].changed = rd.u8() != 0;
            workers[r].round_done = true;
            break;
          }
          case FrameKind::Result: {
            std::size_t off = 1;
            wire::Reader rd{payload, off};
            workers[r].rounds = rd.le<std::uint64_t>();
            workers[r].msgs_sent = rd.le<std::uint64_t>();
            workers[r].processed = rd.le<std::uint64_t>();
            const std::uint64_t count = rd.le<std::uint64_t>();
            for (std::uint64_t i = 0; i < count; ++i) {
              const ElementId e = rd.le<ElementId>();
              const ElementId p = rd.le<ElementId>();
              const RankId pr = rd.le<RankId>();
              workers[r].parents.emplace(e, std::make_pair(p, pr));
            }
            workers[r].result_seen = true;
            ++results;
            break;
          }
          default:
            throw ProtocolError("unexpected frame from worker");
        }
      }
    }
    if (terminate_sent) continue;

    if (mode == Mode::Sync) {
      bool all_done = true;
      for (const auto& w : workers) all_done &= w.round_done;
      if (!all_done) continue;
      bool any_changed = routed_this_round > 0;
      for (auto& w : workers) {
        any_changed |= w.changed;
        w.round_done = false;
      }
      routed_this_round = 0;
      std::vector<std::byte> go;
      put_u8(go, static_cast<std::uint8_t>(FrameKind::BarrierGo));
      put_u8(go, any_changed ? 1 : 0);
      for (const auto& w : workers) send_frame(w.fd, go);
      if (!any_changed) terminate_sent = true;  // workers reply with Result
      continue;
    }

    // Async double-count termination.
    std::uint64_t forwarded_total = 0, processed_total = 0;
    bool all_idle = true;
    for (const auto& w : workers) {
      forwarded_total += w.forwarded;
      processed_total += w.processed;
      all_idle &= w.idle;
    }
    if (confirm_outstanding) {
      bool all_confirmed = true;
      for (const auto& w : workers) all_confirmed &= w.confirm_seen == confirm_id;
      if (!all_confirmed) continue;
      confirm_outstanding = false;
      // The confirmation pass must observe the same counts and idleness.
      if (all_idle && forwarded_total == processed_total &&
          forwarded_total == confirm_forwarded_total) {
        std::vector<std::byte> term;
        put_u8(term, static_cast<std::uint8_t>(FrameKind::Terminate));
        for (const auto& w : workers) send_frame(w.fd, term);
        terminate_sent = true;
      }
    } else if (all_idle && forwarded_total == processed_total) {
      ++confirm_id;
      confirm_forwarded_total = forwarded_total;
      std::vector<std::byte> conf;
      put_u8(conf, static_cast<std::uint8_t>(FrameKind::Confirm));
      put_le(conf, confirm_id);
      for (const auto& w : workers) send_frame(w.fd, conf);
      confirm_outstanding = true;
    }
  }

  for (const auto& w : workers) ::close(w.fd);
  for (const pid_t pid : children) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
      throw ProtocolError("worker exited abnormally");
  }

  // Global pre-finalize audit and label resolution.
  std::unordered_map<ElementId, ElementId> parent;
  for (const auto& w : workers)
    for (const auto& [e, info] : w.parents) parent.emplace(e, info.first);
  SocketCclResult result;
  for (const auto& [e, p] : parent) {
    ElementId cur = e;
    int hops = 0;
    while (parent.at(cur) != cur && hops < 2) {
      cur = parent.at(cur);
      ++hops;
    }
    if (parent.at(cur) != cur)
      throw ProtocolError("three-layer audit failed for element " + std::to_string(e));
    result.labels[e] = cur;
  }

  result.metrics.per_rank.resize(num_ranks);
  for (RankId r = 0; r < num_ranks; ++r) {
    result.metrics.per_rank[r].rounds = workers[r].rounds;
    result.metrics.per_rank[r].msgs_sent = workers[r].msgs_sent;
    result.metrics.per_rank[r].msgs_received = workers[r].processed;
    result.metrics.total_sent += workers[r].msgs_sent;
    result.metrics.total_delivered += workers[r].processed;
  }
  result.metrics.terminated = true;
  return result;
}

// ---------------------------------------------------------------------------
// Worker
// ---------------------------------------------------------------------------

namespace {

std::vector<std::byte> encode_result(const RankState& state, std::uint64_t rounds,
                                     std::uint64_t sent, std::uint64_t processed) {
  std::vector<std::byte> p;
  put_u8(p, static_cast<std::uint8_t>(FrameKind::Result));
  put_le(p, rounds);
  put_le(p, sent);
  put_le(p, processed);
  put_le(p, static_cast<std::uint64_t>(state.local_ids.size()));
  for (std::uint32_t i = 0; i < state.local_ids.size(); ++i) {
    put_le(p, state.local_ids[i]);
    put_le(p, state.parent[i]);
    put_le(p, state.parent_rank[i]);
  }
  return p;
}

}  // namespace

int socket_worker_main(std::uint16_t port, RankId rank) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) sys_fail("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    sys_fail("connect");
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

  std::vector<std::byte> hello;
  put_u8(hello, static_cast<std::uint8_t>(FrameKind::Hello));
  put_le(hello, rank);
  send_frame(fd, hello);

  FrameReader reader(fd);
  std::vector<std::byte> payload;
  auto read_frame_blocking = [&]() {
    while (!reader.next(payload)) {
      wait_readable(fd, -1);
      if (!reader.pump()) throw ProtocolError("coordinator closed the connection");
    }
  };

  // Init.
  read_frame_blocking();
  if (payload.empty() || payload[0] != static_cast<std::byte>(FrameKind::Init))
    throw ProtocolError("expected init frame");
  std::size_t off = 1;
  wire::Reader rd{payload, off};
  const Mode mode = static_cast<Mode>(rd.u8());
  rd.le<std::uint32_t>();  // num_ranks
  const RankId my_rank = rd.le<RankId>();
  std::vector<ElementId> elements(rd.le<std::uint64_t>());
  for (auto& e : elements) e = rd.le<ElementId>();
  std::vector<GraphEdge> edges(rd.le<std::uint64_t>());
  for (auto& e : edges) {
    e.a.id = rd.le<ElementId>();
    e.a.rank = rd.le<RankId>();
    e.b.id = rd.le<ElementId>();
    e.b.rank = rd.le<RankId>();
  }
  RankState state = init_rank(my_rank, std::move(elements), edges);

  std::uint64_t rounds = 0, sent = 0, processed = 0;
  std::vector<Message> inbox;
  bool done = false;
  bool idle = false;
  std::uint64_t last_status_processed = ~0ull;
  bool last_status_idle = false;

  auto flush_round = [&](std::vector<Message>&& msgs) {
    auto out = rank_round(state, std::move(msgs));
    ++rounds;
    for (auto& [dst, m] : out.out) {
      send_frame(fd, encode_msg_frame(my_rank, dst, m));
      ++sent;
    }
    return out.changed || !out.out.empty();
  };

  if (mode == Mode::Sync) {
    for (;;) {
      const bool changed = flush_round(std::move(inbox));
      inbox.clear();
      std::vector<std::byte> done_frame;
      put_u8(done_frame, static_cast<std::uint8_t>(FrameKind::RoundDone));
      put_u8(done_frame, changed ? 1 : 0);
      send_frame(fd, done_frame);
      // Buffer messages until the barrier: they become visible next round.
      bool go = false, cont = false;
      while (!go) {
        read_frame_blocking();
        switch (static_cast<FrameKind>(payload[0])) {
          case FrameKind::Msg:
            inbox.push_back(decode_msg_frame(payload).message);
            ++processed;
            break;
          case FrameKind::BarrierGo: {
            cont = payload.size() > 1 && payload[1] != std::byte{0};
            go = true;
            break;
          }
          default:
            throw ProtocolError("unexpected frame in sync round");
        }
      }
      if (!cont) break;
    }
  } else {
    while (!done) {
      // Drain whatever arrived; block only when idle with nothing to do.
      if (idle && inbox.empty()) wait_readable(fd, kIdlePollMs);
      if (!reader.pump()) throw ProtocolError("coordinator closed the connection");
      bool got_confirm = false;
      std::uint32_t confirm_id = 0;
      while (reader.next(payload)) {
        switch (static_cast<FrameKind>(payload[0])) {
          case FrameKind::Msg:
            inbox.push_back(decode_msg_frame(payload).message);
            ++processed;
            break;
          case FrameKind::Confirm: {
            std::size_t o = 1;
            wire::Reader crd{payload, o};
            confirm_id = crd.le<std::uint32_t>();
            got_confirm = true;
            break;
          }
          case FrameKind::Terminate:
            done = true;
            break;
          default:
            throw ProtocolError("unexpected frame in async loop");
        }
      }
      if (done) break;

      const bool had_input = !inbox.empty();
      const bool changed = flush_round(std::exchange(inbox, {}));
      idle = !changed && !had_input;

      if (got_confirm || processed != last_status_processed || idle != last_status_idle) {
        std::vector<std::byte> status;
        put_u8(status, static_cast<std::uint8_t>(FrameKind::Status));
        put_le(status, processed);
        put_le(status, rounds);
        put_u8(status, idle ? 1 : 0);
        put_le(status, got_confirm ? confirm_id : 0u);
        send_frame(fd, status);
        last_status_processed = processed;
        last_status_idle = idle;
      }
    }
  }

  send_frame(fd, encode_result(state, rounds, sent, processed));
  ::close(fd);
  return 0;
}

}  // namespace ftccl
