#include "tea/oracle.hpp"

#include <string>

#include "tea/error.hpp"

namespace tea {

void Oracle::check_shape(const Image& img) const {
  if (img.shape() != input_shape()) {
    throw ShapeError("oracle expects " + input_shape().str() + ", got " + img.shape().str());
  }
}

PrototypeOracle::PrototypeOracle(std::vector<Image> prototypes) : prototypes_(std::move(prototypes)) {
  if (prototypes_.size() < 2) throw ArgumentError("PrototypeOracle needs at least two classes");
  for (const Image& p : prototypes_) {
    if (p.shape() != prototypes_.front().shape()) {
      throw ShapeError("prototype shapes differ: " + p.shape().str() + " vs " +
                       prototypes_.front().shape().str());
    }
  }
}

Label PrototypeOracle::classify(const Image& img) {
  check_shape(img);
  auto x = img.data();
  Label best = 0;
  double best_d = 0.0;
  for (std::size_t k = 0; k < prototypes_.size(); ++k) {
    auto p = prototypes_[k].data();
    double d = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) d += (x[n] - p[n]) * (x[n] - p[n]);
    if (k == 0 || d < best_d) {
      best = static_cast<Label>(k);
      best_d = d;
    }
  }
  return best;
}

LinearOracle::LinearOracle(Shape shape, std::vector<std::vector<double>> weights,
                           std::vector<double> biases)
    : shape_(shape), weights_(std::move(weights)), biases_(std::move(biases)) {
  if (weights_.size() < 2) throw ArgumentError("LinearOracle needs at least two classes");
  if (biases_.size() != weights_.size()) throw ShapeError("LinearOracle: one bias per class");
  for (const auto& w : weights_) {
    if (w.size() != shape_.size()) {
      throw ShapeError("LinearOracle weight row has " + std::to_string(w.size()) +
                       " entries, expected " + std::to_string(shape_.size()));
    }
  }
}

Label LinearOracle::classify(const Image& img) {
  check_shape(img);
  auto x = img.data();
  Label best = 0;
  double best_score = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    double s = biases_[k];
    for (std::size_t n = 0; n < x.size(); ++n) s += weights_[k][n] * x[n];
    if (k == 0 || s > best_score) {
      best = static_cast<Label>(k);
      best_score = s;
    }
  }
  return best;
}

ConstantOracle::ConstantOracle(Shape shape, std::size_t classes, Label label)
    : shape_(shape), classes_(classes), label_(label) {
  if (label_ >= classes_) throw ArgumentError("ConstantOracle label out of range");
}

Label ConstantOracle::classify(const Image& img) {
  check_shape(img);
  return label_;
}

CountedOracle::CountedOracle(Oracle& inner, QueryBudget budget) : inner_(inner), budget_(budget) {
  if (budget_.used > budget_.max_queries) throw ArgumentError("budget already overdrawn");
}

Label CountedOracle::classify(const Image& img) {
  if (budget_.used >= budget_.max_queries) {
    throw BudgetExhausted("query budget of " + std::to_string(budget_.max_queries) + " exhausted");
  }
  const Label label = inner_.classify(img);
  ++budget_.used;
  records_.push_back({budget_.used, label});
  return label;
}

}  // namespace tea
