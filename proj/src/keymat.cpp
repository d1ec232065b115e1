#include "qvnet/keymat.hpp"

#include <random>

#include "qvnet/error.hpp"

namespace qvnet {

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

KeyBytes derive_key_bytes(std::uint64_t seed, const NodePair& link, std::uint64_t id) {
  const std::uint64_t link_hash = fnv1a(link.str());
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(link_hash), static_cast<std::uint32_t>(link_hash >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
  std::mt19937_64 engine(seq);
  KeyBytes out{};
  for (std::size_t word = 0; word < kKeyBytes / 8; ++word) {
    const std::uint64_t v = engine();
    for (std::size_t b = 0; b < 8; ++b) out[word * 8 + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  return out;
}

KeyBytes xor_bytes(const KeyBytes& x, const KeyBytes& y) {
  KeyBytes out{};
  for (std::size_t i = 0; i < kKeyBytes; ++i) out[i] = x[i] ^ y[i];
  return out;
}

KeyVault::KeyVault(const NetworkGraph& graph) : graph_(&graph) {
  for (const auto& l : graph.links()) links_[l.endpoints].rate = l.rate;
}

KeyVault::LinkStore& KeyVault::store(const NodePair& link) {
  const auto it = links_.find(link);
  if (it == links_.end()) throw Error(ErrorCode::no_path, "no physical link " + link.str());
  return it->second;
}

const KeyVault::LinkStore& KeyVault::store(const NodePair& link) const {
  const auto it = links_.find(link);
  if (it == links_.end()) throw Error(ErrorCode::no_path, "no physical link " + link.str());
  return it->second;
}

std::map<NodePair, std::uint64_t> KeyVault::tick_generate(std::int64_t tick, std::uint64_t seed) {
  if (last_tick_ && tick <= *last_tick_) {
    throw Error(ErrorCode::non_monotonic_tick,
                "tick " + std::to_string(tick) + " after " + std::to_string(*last_tick_));
  }
  last_tick_ = tick;
  std::map<NodePair, std::uint64_t> fresh;
  for (auto& [link, st] : links_) {
    st.accumulator += st.rate;
    const std::int64_t whole = st.accumulator.floor();
    st.accumulator -= Rational(whole);
    for (std::int64_t i = 0; i < whole; ++i) {
      KeyBlock block;
      block.id = next_block_id_++;
      block.link = link;
      block.bytes = derive_key_bytes(seed, link, block.id);
      block.created_tick = tick;
      st.available.push_back(std::move(block));
    }
    st.generated += static_cast<std::uint64_t>(whole);
    fresh[link] = static_cast<std::uint64_t>(whole);
  }
  return fresh;
}

RelayTranscript KeyVault::xor_relay(const Path& path, RelayMode mode) {
  graph_->check_path(path);
  const auto hops = path.hops();

  // Reserve one block per hop; roll back on the first starved hop.
  std::vector<KeyBlock> reserved;
  reserved.reserve(hops.size());
  for (const auto& hop : hops) {
    auto& st = store(hop);
    if (st.available.empty()) {
      for (auto it = reserved.rbegin(); it != reserved.rend(); ++it) {
        auto& back = store(it->link);
        it->state = KeyState::available;
        --back.reserved;
        back.available.push_front(std::move(*it));
      }
      throw Error(ErrorCode::insufficient_keys, hop.str());
    }
    KeyBlock block = std::move(st.available.front());
    st.available.pop_front();
    block.state = KeyState::reserved;
    ++st.reserved;
    reserved.push_back(std::move(block));
  }

  RelayTranscript t;
  t.path = path;
  t.mode = mode;
  t.end_to_end_key = reserved.front().bytes;
  for (std::size_t i = 1; i < reserved.size(); ++i) {
    RelayMessage msg;
    msg.from = path.nodes[i];
    if (mode == RelayMode::hop_by_hop) msg.to = path.nodes[i + 1];
    msg.value = xor_bytes(reserved[i - 1].bytes, reserved[i].bytes);
    t.intermediate_messages.push_back(msg);
  }

  // The destination holds the last hop key and combines every forwarded value.
  KeyBytes reconstructed = reserved.back().bytes;
  for (const auto& msg : t.intermediate_messages) reconstructed = xor_bytes(reconstructed, msg.value);
  if (reconstructed != t.end_to_end_key) {
    throw std::logic_error("xor relay reconstruction mismatch on " + path.str());
  }

  for (auto& block : reserved) {
    auto& st = store(block.link);
    block.state = KeyState::consumed;
    --st.reserved;
    ++st.consumed;
    t.consumed_ids.push_back(block.id);
  }
  return t;
}

VaultSnapshot KeyVault::snapshot() const {
  VaultSnapshot out;
  for (const auto& [link, st] : links_) {
    out[link] = LinkCounts{st.available.size(), st.reserved, st.consumed, st.generated};
  }
  return out;
}

std::uint64_t KeyVault::available(const NodePair& link) const { return store(link).available.size(); }

std::optional<KeyBlock> KeyVault::peek(const NodePair& link) const {
  const auto& st = store(link);
  if (st.available.empty()) return std::nullopt;
  return st.available.front();
}

void KeyVault::overwrite_front_bytes(const NodePair& link, const KeyBytes& bytes) {
  auto& st = store(link);
  if (st.available.empty()) throw Error(ErrorCode::insufficient_keys, link.str());
  st.available.front().bytes = bytes;
}

}  // namespace qvnet
