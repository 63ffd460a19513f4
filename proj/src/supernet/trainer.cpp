#include "embsizer/supernet/trainer.hpp"

#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"
#include "embsizer/dlrm/training.hpp"

namespace embsizer::supernet {

SupernetTrainResult train_supernet(Network& net, const data::SampleTable& train, sampling::Sampler& sampler,
                                   const SupernetTrainOptions& options, const EpochHook& hook) {
  if (sampler.rates().pe.rows() != net.num_fields()) throw ConfigError("sampler and network field counts differ");
  SupernetTrainResult result;
  RngStream draw_rng(role_seed(options.seed, SeedRole::Sampler));
  dlrm::EpochOptions epoch_options;
  epoch_options.batch_size = options.batch_size;
  epoch_options.shuffle_seed = role_seed(options.seed, SeedRole::Shuffle);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    if (options.max_batches != 0) {
      if (result.losses.size() >= options.max_batches) break;
      epoch_options.max_batches = options.max_batches - result.losses.size();
    }
    auto losses = dlrm::run_epoch(
        [&](const data::SampleTable& batch) {
          const Selection selection = sampler.draw(draw_rng);
          const StepResult step = net.train_step(batch, selection);
          if (sampler.adaptive()) sampler.update(net.store().variances(), step.activity);
          return step.loss;
        },
        train, epoch, epoch_options);
    result.losses.insert(result.losses.end(), losses.begin(), losses.end());
    result.epoch_rates.push_back(sampler.rates());
    if (hook) hook(epoch, sampler);
  }
  return result;
}

void save_supernet(const Network& net, const sampling::Sampler& sampler, Checkpoint& ckpt) {
  net.save(ckpt);
  ckpt.meta()["sampler"] = sampling::sampler_config_to_json(sampler.config());
  ckpt.meta()["candidates"] = net.store().sizes().empty() ? std::vector<std::size_t>{} : net.store().sizes()[0];
  ckpt.put("sampler.pe", sampler.rates().pe);
  Matrix pf(1, sampler.rates().pf.size());
  std::copy(sampler.rates().pf.begin(), sampler.rates().pf.end(), pf.data());
  ckpt.put("sampler.pf", pf);
}

sampling::Sampler load_sampler(const Checkpoint& ckpt, const data::Schema& schema) {
  if (!ckpt.meta().contains("sampler")) throw FormatError("checkpoint carries no sampler state");
  auto config = sampling::sampler_config_from_json(ckpt.meta().at("sampler"));
  sampling::Sampler sampler(config, schema, ckpt.meta().at("candidates").get<std::vector<std::size_t>>());
  ckpt.get_into("sampler.pe", sampler.rates().pe);
  Matrix pf(1, schema.size());
  ckpt.get_into("sampler.pf", pf);
  sampler.rates().pf.assign(pf.data(), pf.data() + pf.size());
  return sampler;
}

}  // namespace embsizer::supernet
