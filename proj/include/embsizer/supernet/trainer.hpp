#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "embsizer/sampling/sampler.hpp"
#include "embsizer/supernet/network.hpp"

namespace embsizer::supernet {

struct SupernetTrainOptions {
  std::size_t epochs = 1;
  std::size_t batch_size = 512;
  // Total batch budget across epochs when nonzero.
  std::size_t max_batches = 0;
  std::uint64_t seed = 0;
};

struct SupernetTrainResult {
  std::vector<double> losses;  // per batch
  std::vector<sampling::SampleRates> epoch_rates;  // sampler rates after each epoch
};

// Called after every epoch with (epoch, sampler).
using EpochHook = std::function<void(std::size_t, const sampling::Sampler&)>;

// Per batch: draw a subnet from the sampler, take one optimizer step on it,
// then let the sampler adapt to the new candidate variances and the observed
// field activity. Shuffling and draws come from the Shuffle and Sampler
// roles of `options.seed`.
SupernetTrainResult train_supernet(Network& net, const data::SampleTable& train, sampling::Sampler& sampler,
                                   const SupernetTrainOptions& options, const EpochHook& hook = {});

// Saves network and sampler state together.
void save_supernet(const Network& net, const sampling::Sampler& sampler, Checkpoint& ckpt);
// Restores the sampler state saved by save_supernet.
sampling::Sampler load_sampler(const Checkpoint& ckpt, const data::Schema& schema);

}  // namespace embsizer::supernet
