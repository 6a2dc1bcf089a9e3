#include "disk/losses.hpp"

#include "disk/error.hpp"
#include "disk/ops.hpp"

namespace disk {

namespace {

void check_pair(const Tensor& probs, const Tensor& targets) {
  if (probs.rank() != 2 || probs.shape() != targets.shape()) {
    throw ShapeError("loss expects matching [P, C] probs/targets, got " +
                     shape_str(probs.shape()) + " and " + shape_str(targets.shape()));
  }
}

}  // namespace

Tensor one_hot(std::span<const std::uint8_t> labels, std::size_t classes) {
  std::vector<double> out(labels.size() * classes, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) throw ParameterError("label exceeds class count");
    out[i * classes + labels[i]] = 1.0;
  }
  return Tensor::from({labels.size(), classes}, std::move(out));
}

Tensor soft_dice_loss(const Tensor& probs, const Tensor& targets, double eps) {
  check_pair(probs, targets);
  const Tensor intersection = ops::sum(ops::mul(probs, targets), 0);
  const Tensor denominator =
      ops::add_scalar(ops::add(ops::sum(probs, 0), ops::sum(targets, 0)), eps);
  const Tensor dice = ops::div(ops::add_scalar(ops::scale(intersection, 2.0), eps), denominator);
  return ops::add_scalar(ops::neg(ops::mean(dice)), 1.0);
}

Tensor bce_loss(const Tensor& probs, const Tensor& targets, double clamp) {
  check_pair(probs, targets);
  const Tensor p = ops::clamp(probs, clamp, 1.0 - clamp);
  const Tensor log_p = ops::log(p);
  const Tensor log_q = ops::log(ops::add_scalar(ops::neg(p), 1.0));
  const Tensor not_t = ops::add_scalar(ops::neg(targets), 1.0);
  const Tensor ll = ops::add(ops::mul(targets, log_p), ops::mul(not_t, log_q));
  return ops::neg(ops::mean(ll));
}

Tensor total_loss(const Tensor& probs, const Tensor& targets, const LossConfig& cfg) {
  return ops::add(ops::scale(soft_dice_loss(probs, targets, cfg.dice_eps), cfg.dice_weight),
                  ops::scale(bce_loss(probs, targets, cfg.log_clamp), cfg.bce_weight));
}

}  // namespace disk
