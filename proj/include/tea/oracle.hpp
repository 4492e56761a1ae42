#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tea/image.hpp"

namespace tea {

using Label = std::uint32_t;

/// Hard-label classifier: the only observable is the top-1 class.
///
/// Synthetic implementations are immutable after construction and may be
/// shared across threads. Wrappers that keep state (CountedOracle, remote
/// clients) belong to a single attack run.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual Label classify(const Image& img) = 0;
  [[nodiscard]] virtual Shape input_shape() const = 0;
  [[nodiscard]] virtual std::size_t num_classes() const = 0;

 protected:
  void check_shape(const Image& img) const;
};

/// Nearest-prototype classifier, one prototype per class. Ties go to the
/// lowest index. With two classes the decision regions are the halfspaces
/// either side of the prototypes' perpendicular bisector.
class PrototypeOracle final : public Oracle {
 public:
  explicit PrototypeOracle(std::vector<Image> prototypes);

  Label classify(const Image& img) override;
  [[nodiscard]] Shape input_shape() const override { return prototypes_.front().shape(); }
  [[nodiscard]] std::size_t num_classes() const override { return prototypes_.size(); }

  [[nodiscard]] const std::vector<Image>& prototypes() const { return prototypes_; }

 private:
  std::vector<Image> prototypes_;
};

/// argmax_k (w_k . x + b_k), lowest index on ties.
class LinearOracle final : public Oracle {
 public:
  /// weights holds one row of shape.size() reals per class.
  LinearOracle(Shape shape, std::vector<std::vector<double>> weights, std::vector<double> biases);

  Label classify(const Image& img) override;
  [[nodiscard]] Shape input_shape() const override { return shape_; }
  [[nodiscard]] std::size_t num_classes() const override { return weights_.size(); }

 private:
  Shape shape_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> biases_;
};

/// Answers one fixed label for every input.
class ConstantOracle final : public Oracle {
 public:
  ConstantOracle(Shape shape, std::size_t classes, Label label);

  Label classify(const Image& img) override;
  [[nodiscard]] Shape input_shape() const override { return shape_; }
  [[nodiscard]] std::size_t num_classes() const override { return classes_; }

 private:
  Shape shape_;
  std::size_t classes_;
  Label label_;
};

struct QueryBudget {
  std::size_t max_queries = 0;
  std::size_t used = 0;

  [[nodiscard]] std::size_t remaining() const { return max_queries - used; }
  [[nodiscard]] bool exhausted() const { return used >= max_queries; }
};

struct LabelRecord {
  std::size_t query_index;  // 1-based
  Label label;
};

/// Budget-enforcing wrapper. Call max_queries + 1 throws BudgetExhausted
/// without reaching the wrapped oracle.
class CountedOracle final : public Oracle {
 public:
  CountedOracle(Oracle& inner, QueryBudget budget);

  Label classify(const Image& img) override;
  [[nodiscard]] Shape input_shape() const override { return inner_.input_shape(); }
  [[nodiscard]] std::size_t num_classes() const override { return inner_.num_classes(); }

  [[nodiscard]] const QueryBudget& budget() const { return budget_; }
  [[nodiscard]] std::size_t used() const { return budget_.used; }
  [[nodiscard]] const std::vector<LabelRecord>& records() const { return records_; }

 private:
  Oracle& inner_;
  QueryBudget budget_;
  std::vector<LabelRecord> records_;
};

}  // namespace tea
