#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "qvnet/topology.hpp"

namespace qvnet {

constexpr std::size_t kKeyBytes = 32;
using KeyBytes = std::array<std::uint8_t, kKeyBytes>;

enum class KeyState { available, reserved, consumed };

struct KeyBlock {
  std::uint64_t id = 0;
  NodePair link;
  KeyBytes bytes{};
  KeyState state = KeyState::available;
  std::int64_t created_tick = 0;
};

enum class RelayMode { hop_by_hop, centralized };

struct RelayMessage {
  NodeId from;               // intermediate node emitting the XOR value
  std::optional<NodeId> to;  // next node; empty means the central collector
  KeyBytes value{};
};

struct RelayTranscript {
  Path path;
  RelayMode mode = RelayMode::hop_by_hop;
  KeyBytes end_to_end_key{};
  std::vector<std::uint64_t> consumed_ids;
  std::vector<RelayMessage> intermediate_messages;
};

struct LinkCounts {
  std::uint64_t available = 0;
  std::uint64_t reserved = 0;
  std::uint64_t consumed = 0;
  std::uint64_t generated = 0;

  friend bool operator==(const LinkCounts&, const LinkCounts&) = default;
};

using VaultSnapshot = std::map<NodePair, LinkCounts>;

/// Per-link FIFO store of key blocks shared by the two link endpoints.
///
/// Blocks move available -> reserved -> consumed. A reservation can be
/// released, which puts the blocks back at the head of the queue so FIFO
/// order is preserved. Consumed blocks are dropped from storage; only the
/// counters remember them. The graph must outlive the vault.
class KeyVault {
 public:
  explicit KeyVault(const NetworkGraph& graph);

  [[nodiscard]] const NetworkGraph& graph() const noexcept { return *graph_; }

  /// Adds `floor(accumulated rate)` blocks per link for `tick`. Ticks must
  /// strictly increase. Returns the number of new blocks per link.
  std::map<NodePair, std::uint64_t> tick_generate(std::int64_t tick, std::uint64_t seed);

  /// One-time-pad relay of a fresh end-to-end key along `path`, consuming
  /// exactly one block per hop. On a starved hop every reservation made so
  /// far is released and ErrorCode::insufficient_keys is thrown.
  RelayTranscript xor_relay(const Path& path, RelayMode mode = RelayMode::hop_by_hop);

  [[nodiscard]] VaultSnapshot snapshot() const;
  [[nodiscard]] std::uint64_t available(const NodePair& link) const;

  /// Oldest usable block on a link, if any. Used by tests and diagnostics.
  [[nodiscard]] std::optional<KeyBlock> peek(const NodePair& link) const;

  /// Test hook: overwrite the bytes of the oldest available block on `link`.
  void overwrite_front_bytes(const NodePair& link, const KeyBytes& bytes);

 private:
  struct LinkStore {
    Rational rate;
    Rational accumulator;
    std::deque<KeyBlock> available;
    std::uint64_t reserved = 0;
    std::uint64_t consumed = 0;
    std::uint64_t generated = 0;
  };

  LinkStore& store(const NodePair& link);
  [[nodiscard]] const LinkStore& store(const NodePair& link) const;

  const NetworkGraph* graph_;
  std::map<NodePair, LinkStore> links_;
  std::uint64_t next_block_id_ = 1;
  std::optional<std::int64_t> last_tick_;
};

/// Deterministic key material for block `id` on `link` under `seed`.
KeyBytes derive_key_bytes(std::uint64_t seed, const NodePair& link, std::uint64_t id);

KeyBytes xor_bytes(const KeyBytes& x, const KeyBytes& y);

/// Free-function aliases mirroring the vault members.
inline std::map<NodePair, std::uint64_t> tick_generate(KeyVault& vault, std::int64_t tick, std::uint64_t seed) {
  return vault.tick_generate(tick, seed);
}
inline RelayTranscript xor_relay(KeyVault& vault, const Path& path, RelayMode mode = RelayMode::hop_by_hop) {
  return vault.xor_relay(path, mode);
}
inline VaultSnapshot vault_snapshot(const KeyVault& vault) { return vault.snapshot(); }

}  // namespace qvnet
