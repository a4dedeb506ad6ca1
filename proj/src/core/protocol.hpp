#pragma once

#include <deque>
#include <string>
#include <vector>

#include "compression.hpp"
#include "oracle.hpp"
#include "rng.hpp"

namespace artemis {

// Server-side memory layout under partial participation: per-worker copies
// (PP1) or a single aggregated memory (PP2). Identical at p = 1.
enum class PPMode { PP1, PP2 };

struct VariantConfig {
  std::string name;
  CompressionKind uplink;
  CompressionKind downlink;
  double alpha = 0.0;          // memory rate; 0 = memoryless
  double participation = 1.0;  // p
  PPMode pp_mode = PPMode::PP1;
  double gamma = 0.0;
  // Constant step by default; InvSqrt uses gamma / sqrt(k + 1).
  enum class Schedule { Constant, InvSqrt };
  Schedule schedule = Schedule::Constant;

  // Single-memory update uses alpha/N by default; this switches to the
  // alpha/(pN) alternative.
  bool pp2_scale_memory_by_p = false;
  // Downlink is charged once per broadcast by default (one-to-N multicast);
  // this charges it once per worker instead.
  bool per_worker_downlink_bits = false;

  bool with_memory() const { return alpha != 0.0; }
};

// Named presets: "sgd", "sgd-memory", "qsgd", "diana", "bi-qsgd", "artemis".
// Compressed directions use s-quantization; the memory rate defaults to
// 1/(2(omega_up + 1)). gamma is left at 0 for the caller to fill.
VariantConfig preset_variant(const std::string& name, int dim, int s = 1);
std::vector<std::string> preset_names();

// Independent Bernoulli(p) participation draw for iteration k.
std::vector<int> sample_participants(int workers, double p,
                                     std::uint64_t seed, long long iteration);

struct WorkerState {
  Vec memory;               // h_i
  Vec model;                // local copy, = w_{synced_iteration}
  long long synced_iteration = 0;
};

struct RingEntry {
  CompressedMessage message;
  double step = 0.0;  // gamma used when the update was applied
};

struct ServerState {
  Vec model;                          // authoritative w
  std::vector<Vec> worker_memories;   // PP1 copies of each h_i
  Vec shared_memory;                  // PP2 single h
  std::deque<RingEntry> update_ring;  // recent downlink messages
  std::size_t ring_capacity = 1;
  long long uplink_bits = 0;
  long long downlink_bits = 0;
};

struct IterationRecord {
  long long iteration = 0;  // index of the produced model w_{k+1}
  int participant_count = 0;
  long long uplink_bits = 0;    // cumulative
  long long downlink_bits = 0;  // cumulative
};

// One Artemis run as an exact sequential state machine. Gradient,
// compression and participation draws are keyed by (seed, worker,
// iteration, purpose), so paired variants sharing a seed consume identical
// gradient noise.
class Simulation {
 public:
  Simulation(const Dataset& data, ObjectiveKind objective,
             const VariantConfig& variant, int batch, std::uint64_t seed,
             const Vec& w0);

  IterationRecord run_iteration(long long k);

  const Vec& model() const { return server_.model; }
  const ServerState& server() const { return server_; }
  const WorkerState& worker(int i) const { return workers_[i]; }
  const VariantConfig& variant() const { return variant_; }

  double step_size(long long k) const;

 private:
  long long catch_up(int worker_id, long long k);
  CompressedMessage worker_uplink_step(int worker_id, long long k);

  const Dataset& data_;
  ObjectiveKind objective_;
  VariantConfig variant_;
  int batch_;
  std::uint64_t seed_;
  ServerState server_;
  std::vector<WorkerState> workers_;
  long long downlink_message_bits_;
};

}  // namespace artemis
