#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "raresplit/rng.hpp"
#include "raresplit/splitting.hpp"
#include "raresplit/transport.hpp"

namespace raresplit {

/// Donor client for one failed simulation: client i with probability counts[i] / sum(counts).
std::size_t pick_client(const std::vector<std::uint64_t>& counts, Rng& rng);

/// Level factor n' / (k n) for per-client success counts.
Rational level_factor(const std::vector<std::uint64_t>& counts, std::uint64_t n);

struct ServerStats {
  std::vector<std::uint64_t> transfers;  // states moved per level
  std::uint64_t bytes_sent = 0;
};

/// Server side of distributed fixed-level splitting over already connected channels.
/// Client i gets client id i. Throws on client errors or disconnects.
Estimate serve(const Problem& problem, const std::vector<Score>& levels, std::uint64_t n, const std::vector<Channel*>& clients,
               std::uint64_t seed, double alpha = 0.05, unsigned client_workers = 1, ServerStats* stats = nullptr);

/// Client side: waits for Init, then answers the server until Final, Error or disconnect.
void client_loop(Channel& channel);

/// Runs k clients on threads connected by loopback channels.
Estimate distributed_fixed(const Problem& problem, const std::vector<Score>& levels, std::uint64_t n, std::uint64_t k, std::uint64_t seed,
                           double alpha = 0.05, ServerStats* stats = nullptr);

struct InstancesResult {
  Estimate combined;  // mean of the valid instances; k = number of instances
  std::vector<Estimate> instances;
  std::size_t excluded = 0;
  double standard_error = 0.0;  // sample std / sqrt(valid), 0 with fewer than two
};

/// Runs j independent instances with seeds derive_seed(seed, i) on up to `threads`
/// threads and averages the non-extinct estimates. Throws if all are invalid.
InstancesResult distribute_instances(const std::function<Estimate(std::uint64_t seed)>& instance, std::uint64_t j, std::uint64_t seed,
                                     unsigned threads = 1);

}  // namespace raresplit
