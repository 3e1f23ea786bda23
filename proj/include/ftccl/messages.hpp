#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ftccl/ids.hpp"

namespace ftccl {

/// "Does my parent have a parent?" — sent by a hub to the rank owning its
/// non-local parent. `parent` must be local to the receiver.
struct GrandparentQuery {
  ElementId child = 0;
  RankId child_rank = 0;
  ElementId parent = 0;

  bool operator==(const GrandparentQuery&) const = default;
};

/// The queried parent is currently a temporary root; the hub must not query
/// again until notified.
struct ReplyIsRoot {
  ElementId parent = 0;
  ElementId child = 0;

  bool operator==(const ReplyIsRoot&) const = default;
};

/// The queried parent has a parent; the hub re-aims at the grandparent.
struct ReplyGrandparent {
  ElementId child = 0;
  ElementId grandparent = 0;
  RankId grandparent_rank = 0;
  bool grandparent_known_root = false;

  bool operator==(const ReplyGrandparent&) const = default;
};

/// A previously-root element was united under a smaller element; unblocks
/// waiting hubs and propagates through forwarded-root registries.
struct NoLongerRoot {
  ElementId element = 0;
  ElementId new_parent = 0;
  RankId new_parent_rank = 0;
  bool new_parent_known_root = false;

  bool operator==(const NoLongerRoot&) const = default;
};

/// An edge re-homed to the rank owning its larger endpoint. Both endpoint
/// owner ranks travel with the edge.
struct EdgeTransfer {
  ElementId a = 0;
  RankId a_rank = 0;
  ElementId b = 0;
  RankId b_rank = 0;

  bool operator==(const EdgeTransfer&) const = default;
};

/// Protocol envelope payload. Variant order matches the wire tags 1..5.
using Message =
    std::variant<GrandparentQuery, ReplyIsRoot, ReplyGrandparent, NoLongerRoot, EdgeTransfer>;

/// Wire form: 1 tag byte (1..5), then fixed-width little-endian fields in
/// declaration order; flags are 1 byte.
void encode_message(const Message& m, std::vector<std::byte>& out);

/// Decodes one message starting at `offset`, advancing it past the message.
Message decode_message(std::span<const std::byte> buf, std::size_t& offset);

std::size_t encoded_size(const Message& m);

std::string to_string(const Message& m);

}  // namespace ftccl
