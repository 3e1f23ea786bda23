#include "ftccl/dufind.hpp"

#include <algorithm>

namespace ftccl {

std::uint32_t RankState::idx(ElementId e) const {
  auto it = index.find(e);
  if (it == index.end())
    throw InputError("element " + std::to_string(e) + " is not local to rank " +
                     std::to_string(rank));
  return it->second;
}

std::uint64_t RankState::stored_edge_count() const {
  std::uint64_t n = 0;
  for (const auto& m : edges) n += m.size();
  return n;
}

RankState init_rank(RankId rank, std::vector<ElementId> elements,
                    const std::vector<GraphEdge>& edges) {
  RankState s;
  s.rank = rank;
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  s.local_ids = std::move(elements);
  s.index.reserve(s.local_ids.size());
  for (std::uint32_t i = 0; i < s.local_ids.size(); ++i) s.index.emplace(s.local_ids[i], i);

  s.parent.resize(s.local_ids.size());
  s.parent_rank.assign(s.local_ids.size(), rank);
  s.edges.resize(s.local_ids.size());
  s.pending_query.assign(s.local_ids.size(), 0);
  s.blocked_flag.assign(s.local_ids.size(), 0);
  for (std::uint32_t i = 0; i < s.local_ids.size(); ++i) s.parent[i] = s.local_ids[i];

  for (const auto& e : edges) {
    if (e.a.id == e.b.id) continue;
    const EdgeEndpoint& hi = e.a.id > e.b.id ? e.a : e.b;
    const EdgeEndpoint& lo = e.a.id > e.b.id ? e.b : e.a;
    if (hi.rank != rank || !s.is_local(hi.id))
      throw InputError("init_rank: edge (" + std::to_string(lo.id) + "," +
                       std::to_string(hi.id) + ") belongs at the owner of " +
                       std::to_string(hi.id));
    s.edges[s.idx(hi.id)].emplace(lo.id, lo.rank);
  }
  return s;
}

ElementClass classify(const RankState& state, ElementId e) {
  const auto i = state.idx(e);
  if (state.parent[i] == e) return ElementClass::TemporaryRoot;
  if (!state.parent_is_local(i)) return ElementClass::Hub;
  return ElementClass::Ordinary;
}

void update_ordinary(RankState& state) {
  for (std::uint32_t i = 0; i < state.local_ids.size(); ++i) {
    const ElementId e = state.local_ids[i];
    const ElementId p = state.parent[i];
    if (p == e || !state.parent_is_local(i)) continue;  // root or hub
    const auto pi = state.idx(p);
    if (!state.parent_is_local(pi)) continue;  // parent is a local hub: wait
    const ElementId gp = state.parent[pi];
    if (gp != p) {
      state.parent[i] = gp;
      state.mark_changed();
    }
  }
}

void update_hub(RankState& state, ElementId hub, Outbox& out) {
  const auto i = state.idx(hub);
  if (state.pending_query[i] || state.blocked_flag[i]) return;
  out.send(state.parent_rank[i], GrandparentQuery{hub, state.rank, state.parent[i]});
  state.pending_query[i] = 1;
  state.mark_changed();
}

void update_hubs(RankState& state, Outbox& out) {
  for (std::uint32_t i = 0; i < state.local_ids.size(); ++i) {
    const ElementId e = state.local_ids[i];
    if (state.parent[i] != e && !state.parent_is_local(i)) update_hub(state, e, out);
  }
}

namespace {

// True when this rank believes `e` is currently a temporary root.
bool believes_root(const RankState& state, ElementId e) {
  if (state.is_local(e)) return state.parent[state.idx(e)] == e;
  return state.set_root.count(e) != 0;
}

void note_root_claim(RankState& state, ElementId claimed_root, RankId told_rank) {
  state.forwarded_root_info[claimed_root].insert(told_rank);
  state.mark_changed();
}

}  // namespace

void answer_query(RankState& state, const GrandparentQuery& q, Outbox& out) {
  if (!state.is_local(q.parent))
    throw ProtocolError("grandparent query for non-local parent " + std::to_string(q.parent));
  const auto pi = state.idx(q.parent);
  if (state.parent[pi] == q.parent) {
    out.send(q.child_rank, ReplyIsRoot{q.parent, q.child});
    state.root_subscribers[q.parent].insert(q.child_rank);
    state.mark_changed();
    return;
  }
  const ElementId gp = state.parent[pi];
  const RankId gp_rank = state.parent_rank[pi];
  const bool known_root = believes_root(state, gp);
  out.send(q.child_rank, ReplyGrandparent{q.child, gp, gp_rank, known_root});
  if (known_root) note_root_claim(state, gp, q.child_rank);
}

void apply_reply(RankState& state, const ReplyIsRoot& r) {
  const auto i = state.idx(r.child);
  if (!state.pending_query[i])
    throw ProtocolError("root reply for non-pending element " + std::to_string(r.child));
  state.pending_query[i] = 0;
  state.blocked_flag[i] = 1;
  state.blocked_on_root[r.parent].push_back(r.child);
  if (!state.set_nonroot.count(r.parent)) state.set_root.insert(r.parent);
  state.mark_changed();
}

void apply_reply(RankState& state, const ReplyGrandparent& r) {
  const auto i = state.idx(r.child);
  if (!state.pending_query[i])
    throw ProtocolError("grandparent reply for non-pending element " +
                        std::to_string(r.child));
  if (r.grandparent >= state.parent[i])
    throw ProtocolError("grandparent reply would move a parent pointer upward");
  state.pending_query[i] = 0;
  state.parent[i] = r.grandparent;
  state.parent_rank[i] =
      state.is_local(r.grandparent) ? state.rank : r.grandparent_rank;
  if (r.grandparent_known_root && !state.is_local(r.grandparent) &&
      !state.set_nonroot.count(r.grandparent))
    state.set_root.insert(r.grandparent);
  state.mark_changed();
}

void update_root(RankState& state, ElementId root, Outbox& out) {
  const auto i = state.idx(root);
  if (state.parent[i] != root) throw ProtocolError("update_root on a non-root element");

  // Smallest smaller neighbor, local candidates preferred over remote ones.
  auto& store = state.edges[i];
  ElementId best_local = root, best_remote = root;
  RankId best_remote_rank = state.rank;
  for (const auto& [other, other_rank] : store) {
    if (other >= root) continue;
    if (other_rank == state.rank) {
      best_local = std::min(best_local, other);
    } else if (other < best_remote || best_remote == root) {
      best_remote = other;
      best_remote_rank = other_rank;
    }
  }
  const bool have_local = best_local != root;
  if (!have_local && best_remote == root) return;  // no smaller neighbor: stays a root
  const ElementId best = have_local ? best_local : best_remote;
  const RankId best_rank = have_local ? state.rank : best_remote_rank;

  store.erase(best);
  state.parent[i] = best;
  state.parent_rank[i] = best_rank;
  state.mark_changed();

  const bool known_root = believes_root(state, best);
  const NoLongerRoot note{root, best, best_rank, known_root};
  if (auto it = state.root_subscribers.find(root); it != state.root_subscribers.end()) {
    for (RankId dst : it->second) {
      out.send(dst, note);
      if (known_root) note_root_claim(state, best, dst);
    }
    state.root_subscribers.erase(it);
  }
  // Local delivery of the same notification relays forwarded root claims.
  apply_no_longer_root(state, note, out);
}

void update_roots(RankState& state, Outbox& out) {
  for (std::uint32_t i = 0; i < state.local_ids.size(); ++i)
    if (state.parent[i] == state.local_ids[i]) update_root(state, state.local_ids[i], out);
}

void apply_no_longer_root(RankState& state, const NoLongerRoot& n, Outbox& out) {
  if (!state.is_local(n.element)) {
    if (state.set_root.erase(n.element)) state.mark_changed();
    if (state.set_nonroot.insert(n.element).second) state.mark_changed();
  }
  if (n.new_parent_known_root && !state.is_local(n.new_parent) &&
      !state.set_nonroot.count(n.new_parent))
    state.set_root.insert(n.new_parent);

  if (auto it = state.blocked_on_root.find(n.element); it != state.blocked_on_root.end()) {
    for (ElementId hub : it->second) {
      const auto hi = state.idx(hub);
      state.blocked_flag[hi] = 0;
      state.parent[hi] = n.new_parent;
      state.parent_rank[hi] =
          state.is_local(n.new_parent) ? state.rank : n.new_parent_rank;
      state.mark_changed();
    }
    state.blocked_on_root.erase(it);
  }

  if (auto it = state.forwarded_root_info.find(n.element);
      it != state.forwarded_root_info.end()) {
    const bool known_root = believes_root(state, n.new_parent);
    const NoLongerRoot relay{n.element, n.new_parent, n.new_parent_rank, known_root};
    const std::set<RankId> targets = std::move(it->second);
    state.forwarded_root_info.erase(it);
    for (RankId dst : targets) {
      out.send(dst, relay);
      if (known_root) note_root_claim(state, n.new_parent, dst);
    }
    state.mark_changed();
  }
}

void ingest_edge(RankState& state, const EdgeTransfer& e) {
  if (e.a == e.b) return;
  const ElementId hi = std::max(e.a, e.b);
  const ElementId lo = std::min(e.a, e.b);
  const RankId hi_rank = e.a > e.b ? e.a_rank : e.b_rank;
  const RankId lo_rank = e.a > e.b ? e.b_rank : e.a_rank;
  if (hi_rank != state.rank || !state.is_local(hi))
    throw ProtocolError("edge transfer addressed to the wrong rank");
  if (state.edges[state.idx(hi)].emplace(lo, lo_rank).second) state.mark_changed();
}

void transfer_edges(RankState& state, Outbox& out) {
  for (std::uint32_t i = 0; i < state.local_ids.size(); ++i) {
    const ElementId e = state.local_ids[i];
    const ElementId p = state.parent[i];
    if (p == e || state.edges[i].empty()) continue;

    bool moves = false;
    if (!state.parent_is_local(i)) {
      // Hub: forward once the parent is known to be a temporary root.
      moves = state.set_root.count(p) != 0;
    } else {
      const auto pi = state.idx(p);
      // Parent is a local temporary root, or a local hub acting as a conduit.
      moves = state.parent[pi] == p || !state.parent_is_local(pi);
    }
    if (!moves) continue;

    const RankId p_rank = state.parent_rank[i];
    auto store = std::move(state.edges[i]);
    state.edges[i].clear();
    state.mark_changed();
    for (const auto& [other, other_rank] : store) {
      if (other == p) continue;  // collapses onto the tree link
      EdgeTransfer rewritten{p, p_rank, other, other_rank};
      const RankId dst = p > other ? p_rank : other_rank;
      if (dst == state.rank)
        ingest_edge(state, rewritten);
      else
        out.send(dst, rewritten);
    }
  }
}

StepOutput<Message> rank_round(RankState& state, std::vector<Message>&& inbox) {
  state.changed = false;
  Outbox out;
  for (auto& m : inbox) {
    std::visit(
        [&](auto&& msg) {
          using T = std::decay_t<decltype(msg)>;
          if constexpr (std::is_same_v<T, GrandparentQuery>)
            answer_query(state, msg, out);
          else if constexpr (std::is_same_v<T, ReplyIsRoot>)
            apply_reply(state, msg);
          else if constexpr (std::is_same_v<T, ReplyGrandparent>)
            apply_reply(state, msg);
          else if constexpr (std::is_same_v<T, NoLongerRoot>)
            apply_no_longer_root(state, msg, out);
          else
            ingest_edge(state, msg);
        },
        m);
  }
  update_ordinary(state);
  update_hubs(state, out);
  update_roots(state, out);
  transfer_edges(state, out);
  return {std::move(out.msgs), state.changed};
}

void finalize(RankState& state) {
  for (std::uint32_t i = 0; i < state.local_ids.size(); ++i) {
    const ElementId e = state.local_ids[i];
    const ElementId p = state.parent[i];
    if (p == e || !state.parent_is_local(i)) continue;
    const auto pi = state.idx(p);
    if (state.parent[pi] == p) continue;  // already one hop from a local root
    if (!state.parent_is_local(pi)) {
      state.parent[i] = state.parent[pi];
      state.parent_rank[i] = state.parent_rank[pi];
    } else {
      throw ProtocolError("finalize: element " + std::to_string(e) +
                          " is more than two hops from its root");
    }
  }
}

std::unordered_map<ElementId, ElementId> sequential_oracle(
    const std::vector<std::pair<ElementId, ElementId>>& edges,
    const std::vector<ElementId>& elements) {
  std::unordered_map<ElementId, ElementId> parent;
  parent.reserve(elements.size() + 2 * edges.size());
  auto ensure = [&parent](ElementId e) { parent.emplace(e, e); };
  auto find = [&parent](ElementId e) {
    ElementId root = e;
    while (parent[root] != root) root = parent[root];
    while (parent[e] != root) {
      const ElementId next = parent[e];
      parent[e] = root;
      e = next;
    }
    return root;
  };
  for (ElementId e : elements) ensure(e);
  for (const auto& [a, b] : edges) {
    ensure(a);
    ensure(b);
    const ElementId ra = find(a), rb = find(b);
    if (ra == rb) continue;
    // The smaller id stays the root, so labels are component minima.
    parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::unordered_map<ElementId, ElementId> labels;
  labels.reserve(parent.size());
  for (const auto& [e, _] : parent) labels.emplace(e, find(e));
  return labels;
}

std::map<ElementId, ElementId> collect_labels(const std::vector<RankState>& states) {
  std::map<ElementId, ElementId> labels;
  for (const auto& s : states)
    for (std::uint32_t i = 0; i < s.local_ids.size(); ++i)
      labels.emplace(s.local_ids[i], s.parent[i]);
  return labels;
}

std::vector<ElementId> three_layer_violations(const std::vector<RankState>& states) {
  std::unordered_map<ElementId, ElementId> parent;
  for (const auto& s : states)
    for (std::uint32_t i = 0; i < s.local_ids.size(); ++i)
      parent.emplace(s.local_ids[i], s.parent[i]);

  std::vector<ElementId> bad;
  for (const auto& [e, p] : parent) {
    (void)p;
    ElementId cur = e;
    int hops = 0;
    while (parent.at(cur) != cur && hops < 2) {
      cur = parent.at(cur);
      ++hops;
    }
    if (parent.at(cur) != cur) bad.push_back(e);
  }
  std::sort(bad.begin(), bad.end());
  return bad;
}

}  // namespace ftccl
