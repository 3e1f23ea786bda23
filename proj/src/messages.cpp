#include "ftccl/messages.hpp"

#include "ftccl/wire.hpp"

#include <sstream>

namespace ftccl {

namespace {

using wire::put_le;
using wire::put_u8;
using Reader = wire::Reader;

}  // namespace

void encode_message(const Message& m, std::vector<std::byte>& out) {
  put_u8(out, static_cast<std::uint8_t>(m.index() + 1));
  std::visit(
      [&out](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, GrandparentQuery>) {
          put_le(out, msg.child);
          put_le(out, msg.child_rank);
          put_le(out, msg.parent);
        } else if constexpr (std::is_same_v<T, ReplyIsRoot>) {
          put_le(out, msg.parent);
          put_le(out, msg.child);
        } else if constexpr (std::is_same_v<T, ReplyGrandparent>) {
          put_le(out, msg.child);
          put_le(out, msg.grandparent);
          put_le(out, msg.grandparent_rank);
          put_u8(out, msg.grandparent_known_root ? 1 : 0);
        } else if constexpr (std::is_same_v<T, NoLongerRoot>) {
          put_le(out, msg.element);
          put_le(out, msg.new_parent);
          put_le(out, msg.new_parent_rank);
          put_u8(out, msg.new_parent_known_root ? 1 : 0);
        } else {
          put_le(out, msg.a);
          put_le(out, msg.a_rank);
          put_le(out, msg.b);
          put_le(out, msg.b_rank);
        }
      },
      m);
}

Message decode_message(std::span<const std::byte> buf, std::size_t& offset) {
  Reader r{buf, offset};
  switch (r.u8()) {
    case 1: {
      GrandparentQuery m;
      m.child = r.le<ElementId>();
      m.child_rank = r.le<RankId>();
      m.parent = r.le<ElementId>();
      return m;
    }
    case 2: {
      ReplyIsRoot m;
      m.parent = r.le<ElementId>();
      m.child = r.le<ElementId>();
      return m;
    }
    case 3: {
      ReplyGrandparent m;
      m.child = r.le<ElementId>();
      m.grandparent = r.le<ElementId>();
      m.grandparent_rank = r.le<RankId>();
      m.grandparent_known_root = r.u8() != 0;
      return m;
    }
    case 4: {
      NoLongerRoot m;
      m.element = r.le<ElementId>();
      m.new_parent = r.le<ElementId>();
      m.new_parent_rank = r.le<RankId>();
      m.new_parent_known_root = r.u8() != 0;
      return m;
    }
    case 5: {
      EdgeTransfer m;
      m.a = r.le<ElementId>();
      m.a_rank = r.le<RankId>();
      m.b = r.le<ElementId>();
      m.b_rank = r.le<RankId>();
      return m;
    }
    default:
      throw ProtocolError("decode_message: unknown payload tag");
  }
}

std::size_t encoded_size(const Message& m) {
  switch (m.index()) {
    case 0: return 1 + 8 + 4 + 8;
    case 1: return 1 + 8 + 8;
    case 2: return 1 + 8 + 8 + 4 + 1;
    case 3: return 1 + 8 + 8 + 4 + 1;
    default: return 1 + 8 + 4 + 8 + 4;
  }
}

std::string to_string(const Message& m) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, GrandparentQuery>) {
          os << "query{child=" << msg.child << "@r" << msg.child_rank
             << " parent=" << msg.parent << "}";
        } else if constexpr (std::is_same_v<T, ReplyIsRoot>) {
          os << "is_root{parent=" << msg.parent << " child=" << msg.child << "}";
        } else if constexpr (std::is_same_v<T, ReplyGrandparent>) {
          os << "grandparent{child=" << msg.child << " gp=" << msg.grandparent << "@r"
             << msg.grandparent_rank << " known_root=" << msg.grandparent_known_root << "}";
        } else if constexpr (std::is_same_v<T, NoLongerRoot>) {
          os << "no_longer_root{element=" << msg.element << " new_parent=" << msg.new_parent
             << "@r" << msg.new_parent_rank << " known_root=" << msg.new_parent_known_root
             << "}";
        } else {
          os << "edge{" << msg.a << "@r" << msg.a_rank << " - " << msg.b << "@r" << msg.b_rank
             << "}";
        }
      },
      m);
  return os.str();
}

}  // namespace ftccl
