#include "protocol.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace artemis {

VariantConfig preset_variant(const std::string& name, int dim, int s) {
  VariantConfig v;
  v.name = name;
  const CompressionKind quant = CompressionKind::quantization(s);
  const double memory_rate = 1.0 / (2.0 * (omega(quant, dim) + 1.0));
  if (name == "sgd") {
    // identity both ways, no memory
  } else if (name == "sgd-memory") {
    v.alpha = 0.5;  // omega_up = 0
  } else if (name == "qsgd") {
    v.uplink = quant;
  } else if (name == "diana") {
    v.uplink = quant;
    v.alpha = memory_rate;
  } else if (name == "bi-qsgd") {
    v.uplink = quant;
    v.downlink = quant;
  } else if (name == "artemis") {
    v.uplink = quant;
    v.downlink = quant;
    v.alpha = memory_rate;
  } else {
    throw std::invalid_argument("unknown preset variant: " + name);
  }
  return v;
}

std::vector<std::string> preset_names() {
  return {"sgd", "sgd-memory", "qsgd", "diana", "bi-qsgd", "artemis"};
}

std::vector<int> sample_participants(int workers, double p, std::uint64_t seed,
                                     long long iteration) {
  if (!(p > 0.0) || p > 1.0)
    throw std::invalid_argument("sample_participants: p in (0, 1]");
  std::vector<int> out;
  out.reserve(workers);
  if (p >= 1.0) {
    for (int i = 0; i < workers; ++i) out.push_back(i);
    return out;
  }
  for (int i = 0; i < workers; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i),
                  static_cast<std::uint64_t>(iteration), Draw::Participation);
    if (rng.bernoulli(p)) out.push_back(i);
  }
  return out;
}

Simulation::Simulation(const Dataset& data, ObjectiveKind objective,
                       const VariantConfig& variant, int batch,
                       std::uint64_t seed, const Vec& w0)
    : data_(data),
      objective_(objective),
      variant_(variant),
      batch_(batch),
      seed_(seed) {
  if (w0.size() != data.dim)
    throw std::invalid_argument("Simulation: w0 dimension mismatch");
  if (!(variant.gamma > 0.0))
    throw std::invalid_argument("Simulation: gamma must be positive");
  const int n = data.workers();
  server_.model = w0;
  server_.worker_memories.assign(n, Vec::Zero(data.dim));
  server_.shared_memory = Vec::Zero(data.dim);
  downlink_message_bits_ = message_bits(variant.downlink, data.dim);
  server_.ring_capacity = static_cast<std::size_t>(
      (32LL * data.dim) / downlink_message_bits_);
  if (server_.ring_capacity == 0) server_.ring_capacity = 1;
  workers_.resize(n);
  for (auto& w : workers_) {
    w.memory = Vec::Zero(data.dim);
    w.model = w0;
    w.synced_iteration = 0;
  }
}

double Simulation::step_size(long long k) const {
  if (variant_.schedule == VariantConfig::Schedule::InvSqrt)
    return variant_.gamma / std::sqrt(static_cast<double>(k) + 1.0);
  return variant_.gamma;
}

long long Simulation::catch_up(int worker_id, long long k) {
  WorkerState& worker = workers_[worker_id];
  const long long missed = k - worker.synced_iteration;
  if (missed == 0) return 0;
  long long bits = 0;
  if (missed > static_cast<long long>(server_.ring_capacity)) {
    worker.model = server_.model;
    bits = 32LL * data_.dim;
  } else {
    assert(missed <= static_cast<long long>(server_.update_ring.size()));
    const auto begin = server_.update_ring.end() - missed;
    for (auto it = begin; it != server_.update_ring.end(); ++it) {
      worker.model -= it->step * it->message.payload;
      bits += it->message.bits;
    }
    // Replay retraces the server's own update sequence, so the two models
    // must coincide bit for bit.
    assert((worker.model.array() == server_.model.array()).all());
  }
  worker.synced_iteration = k;
  return bits;
}

CompressedMessage Simulation::worker_uplink_step(int worker_id, long long k) {
  WorkerState& worker = workers_[worker_id];
  const auto id = static_cast<std::uint64_t>(worker_id);
  RngStream grad_rng(seed_, id, static_cast<std::uint64_t>(k), Draw::Gradient);
  const Vec gradient = stochastic_gradient(
      objective_, data_.shards[worker_id], worker.model, batch_, grad_rng);
  const Vec delta = gradient - worker.memory;
  RngStream comp_rng(seed_, id, static_cast<std::uint64_t>(k),
                     Draw::UplinkCompress);
  CompressedMessage msg = compress(delta, variant_.uplink, comp_rng);
  if (variant_.with_memory())
    worker.memory += variant_.alpha * msg.payload;
  return msg;
}

IterationRecord Simulation::run_iteration(long long k) {
  const int n = data_.workers();
  const auto participants =
      sample_participants(n, variant_.participation, seed_, k);

  std::vector<CompressedMessage> messages;
  messages.reserve(participants.size());
  for (int id : participants) {
    server_.downlink_bits += catch_up(id, k);
    messages.push_back(worker_uplink_step(id, k));
    server_.uplink_bits += messages.back().bits;
  }

  const double scale = variant_.participation * n;
  Vec aggregate;
  if (variant_.pp_mode == PPMode::PP1) {
    Vec sum_delta = Vec::Zero(data_.dim);
    Vec sum_memory = Vec::Zero(data_.dim);
    for (std::size_t j = 0; j < participants.size(); ++j) {
      sum_delta += messages[j].payload;
      sum_memory += server_.worker_memories[participants[j]];
    }
    aggregate = (sum_delta + sum_memory) / scale;
    if (variant_.with_memory()) {
      for (std::size_t j = 0; j < participants.size(); ++j)
        server_.worker_memories[participants[j]] +=
            variant_.alpha * messages[j].payload;
    }
  } else {
    Vec sum_delta = Vec::Zero(data_.dim);
    for (const auto& msg : messages) sum_delta += msg.payload;
    aggregate = server_.shared_memory + sum_delta / scale;
    if (variant_.with_memory()) {
      const double denom =
          variant_.pp2_scale_memory_by_p ? scale : static_cast<double>(n);
      server_.shared_memory += (variant_.alpha / denom) * sum_delta;
    }
  }

  RngStream down_rng(seed_, static_cast<std::uint64_t>(n),
                     static_cast<std::uint64_t>(k), Draw::DownlinkCompress);
  CompressedMessage broadcast = compress(aggregate, variant_.downlink, down_rng);
  const double step = step_size(k);
  server_.model -= step * broadcast.payload;
  server_.update_ring.push_back({broadcast, step});
  if (server_.update_ring.size() > server_.ring_capacity)
    server_.update_ring.pop_front();
  server_.downlink_bits += variant_.per_worker_downlink_bits
                               ? broadcast.bits * n
                               : broadcast.bits;

  // Participants are online for the broadcast: their local model advances
  // with the round at no extra bit cost.
  for (int id : participants) {
    workers_[id].model -= step * broadcast.payload;
    workers_[id].synced_iteration = k + 1;
  }

  IterationRecord rec;
  rec.iteration = k + 1;
  rec.participant_count = static_cast<int>(participants.size());
  rec.uplink_bits = server_.uplink_bits;
  rec.downlink_bits = server_.downlink_bits;
  return rec;
}

}  // namespace artemis
