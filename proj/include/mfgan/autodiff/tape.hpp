#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace mfgan::ad {

class Tape;

/// Handle to a scalar node recorded on a Tape. Cheap to copy; only valid
/// while its tape is alive.
class Var {
 public:
  Var() = default;

  double value() const;
  int index() const { return index_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  friend class VarRange;
  Var(Tape* tape, int index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  int index_ = -1;
};

/// Contiguous run of leaf variables, e.g. one network's parameters.
class VarRange {
 public:
  VarRange() = default;
  VarRange(Tape* tape, int first, int count) : tape_(tape), first_(first), count_(count) {}

  Var operator[](std::size_t i) const;
  std::size_t size() const { return static_cast<std::size_t>(count_); }
  int first() const { return first_; }
  Tape* tape() const { return tape_; }
  /// Sub-range [offset, offset + count).
  VarRange slice(std::size_t offset, std::size_t count) const;
  /// Current values of the leaves.
  std::span<const double> values() const;

 private:
  Tape* tape_ = nullptr;
  int first_ = 0;
  int count_ = 0;
};

/// A multi-output primitive whose reverse pass is supplied as a whole.
///
/// The block's outputs are recorded as parentless nodes; once the reverse
/// sweep has finalized their adjoints, `backward` receives them and adds
/// the contribution to the adjoints of whatever nodes the block read.
class TapeBlock {
 public:
  virtual ~TapeBlock() = default;
  virtual void backward(std::span<const double> output_adjoints,
                        std::span<double> adjoints) const = 0;
};

/// Reverse-mode recording tape over scalar nodes with at most two parents,
/// plus opaque blocks (network jet passes) with hand-written adjoints.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var variable(double value);
  VarRange variables(std::span<const double> values);
  Var constant(double value) { return variable(value); }

  Var unary(double value, const Var& a, double da);
  Var binary(double value, const Var& a, double da, const Var& b, double db);

  /// Records `values.size()` output nodes owned by `block`; returns the
  /// index of the first one.
  int add_block(std::unique_ptr<TapeBlock> block, std::span<const double> values);

  double value(int index) const { return values_[static_cast<std::size_t>(index)]; }
  std::span<const double> values_span() const { return values_; }
  std::size_t size() const { return values_.size(); }

  /// Adjoints of every node with respect to `output` (one reverse sweep).
  std::vector<double> gradient(const Var& output) const;

 private:
  struct Node {
    int parent[2];
    double partial[2];
  };
  struct BlockRecord {
    int first;
    int count;
    std::unique_ptr<TapeBlock> block;
  };

  int push(double value, Node node);
  void check_owner(const Var& v) const;

  std::vector<double> values_;
  std::vector<Node> nodes_;
  std::vector<BlockRecord> blocks_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator+(const Var& a, double b);
Var operator+(double a, const Var& b);
Var operator-(const Var& a, double b);
Var operator-(double a, const Var& b);
Var operator*(const Var& a, double b);
Var operator*(double a, const Var& b);
Var operator/(const Var& a, double b);
Var operator/(double a, const Var& b);
Var operator-(const Var& a);
Var& operator+=(Var& a, const Var& b);
Var& operator-=(Var& a, const Var& b);

Var exp(const Var& a);
Var log(const Var& a);
Var sin(const Var& a);
Var cos(const Var& a);
Var tanh(const Var& a);
Var sqrt(const Var& a);
Var square(const Var& a);
/// |a|; throws NotDifferentiable at a == 0.
Var abs(const Var& a);

inline double square(double a) { return a * a; }

/// Scalar loss recorded on a tape from a parameter range.
using LossFunction = std::function<Var(Tape&, VarRange)>;

struct ValueAndGradient {
  double value;
  std::vector<double> gradient;
};

/// Records `loss` once and returns its value and its exact gradient with
/// respect to every entry of `params`.
ValueAndGradient value_and_gradient(const LossFunction& loss, std::span<const double> params);

}  // namespace mfgan::ad
