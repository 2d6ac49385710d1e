#include "mfgan/autodiff/tape.hpp"

#include <algorithm>
#include <cmath>

#include "mfgan/common/error.hpp"

namespace mfgan::ad {

double Var::value() const {
  if (tape_ == nullptr) throw Error("value() on a detached Var");
  return tape_->value(index_);
}

Var VarRange::operator[](std::size_t i) const {
  if (i >= size()) throw ShapeError("VarRange index " + std::to_string(i) + " out of range");
  return Var(tape_, first_ + static_cast<int>(i));
}

VarRange VarRange::slice(std::size_t offset, std::size_t count) const {
  if (offset + count > size()) throw ShapeError("VarRange slice out of range");
  return VarRange(tape_, first_ + static_cast<int>(offset), static_cast<int>(count));
}

std::span<const double> VarRange::values() const {
  if (count_ == 0) return {};
  return {&tape_->values_span()[static_cast<std::size_t>(first_)], size()};
}

int Tape::push(double value, Node node) {
  values_.push_back(value);
  nodes_.push_back(node);
  return static_cast<int>(values_.size()) - 1;
}

void Tape::check_owner(const Var& v) const {
  if (v.tape() != this) throw Error("Var recorded on a different tape");
}

Var Tape::variable(double value) { return Var(this, push(value, Node{{-1, -1}, {0.0, 0.0}})); }

VarRange Tape::variables(std::span<const double> values) {
  const int first = static_cast<int>(values_.size());
  for (double v : values) push(v, Node{{-1, -1}, {0.0, 0.0}});
  return VarRange(this, first, static_cast<int>(values.size()));
}

Var Tape::unary(double value, const Var& a, double da) {
  check_owner(a);
  return Var(this, push(value, Node{{a.index(), -1}, {da, 0.0}}));
}

Var Tape::binary(double value, const Var& a, double da, const Var& b, double db) {
  check_owner(a);
  check_owner(b);
  return Var(this, push(value, Node{{a.index(), b.index()}, {da, db}}));
}

int Tape::add_block(std::unique_ptr<TapeBlock> block, std::span<const double> values) {
  const int first = static_cast<int>(values_.size());
  for (double v : values) push(v, Node{{-1, -1}, {0.0, 0.0}});
  blocks_.push_back(BlockRecord{first, static_cast<int>(values.size()), std::move(block)});
  return first;
}

std::vector<double> Tape::gradient(const Var& output) const {
  check_owner(output);
  std::vector<double> adjoint(values_.size(), 0.0);
  adjoint[static_cast<std::size_t>(output.index())] = 1.0;

  // Blocks are recorded in increasing index order; a block runs once the
  // sweep has passed below its first output.
  auto block = blocks_.rbegin();
  for (int i = output.index(); i >= 0; --i) {
    while (block != blocks_.rend() && block->first > i) {
      const auto first = static_cast<std::size_t>(block->first);
      block->block->backward(
          std::span<const double>(adjoint).subspan(first, static_cast<std::size_t>(block->count)),
          adjoint);
      ++block;
    }
    const double a = adjoint[static_cast<std::size_t>(i)];
    if (a == 0.0) continue;
    const Node& node = nodes_[static_cast<std::size_t>(i)];
    if (node.parent[0] >= 0) adjoint[static_cast<std::size_t>(node.parent[0])] += a * node.partial[0];
    if (node.parent[1] >= 0) adjoint[static_cast<std::size_t>(node.parent[1])] += a * node.partial[1];
  }
  return adjoint;
}

Var operator+(const Var& a, const Var& b) {
  return a.tape()->binary(a.value() + b.value(), a, 1.0, b, 1.0);
}
Var operator-(const Var& a, const Var& b) {
  return a.tape()->binary(a.value() - b.value(), a, 1.0, b, -1.0);
}
Var operator*(const Var& a, const Var& b) {
  return a.tape()->binary(a.value() * b.value(), a, b.value(), b, a.value());
}
Var operator/(const Var& a, const Var& b) {
  const double inv = 1.0 / b.value();
  const double q = a.value() * inv;
  return a.tape()->binary(q, a, inv, b, -q * inv);
}
Var operator+(const Var& a, double b) { return a.tape()->unary(a.value() + b, a, 1.0); }
Var operator+(double a, const Var& b) { return b + a; }
Var operator-(const Var& a, double b) { return a.tape()->unary(a.value() - b, a, 1.0); }
Var operator-(double a, const Var& b) { return b.tape()->unary(a - b.value(), b, -1.0); }
Var operator*(const Var& a, double b) { return a.tape()->unary(a.value() * b, a, b); }
Var operator*(double a, const Var& b) { return b * a; }
Var operator/(const Var& a, double b) { return a.tape()->unary(a.value() / b, a, 1.0 / b); }
Var operator/(double a, const Var& b) {
  const double q = a / b.value();
  return b.tape()->unary(q, b, -q / b.value());
}
Var operator-(const Var& a) { return a.tape()->unary(-a.value(), a, -1.0); }
Var& operator+=(Var& a, const Var& b) { return a = a + b; }
Var& operator-=(Var& a, const Var& b) { return a = a - b; }

Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return a.tape()->unary(e, a, e);
}
Var log(const Var& a) {
  if (!(a.value() > 0.0)) throw NumericalError("log of non-positive value");
  return a.tape()->unary(std::log(a.value()), a, 1.0 / a.value());
}
Var sin(const Var& a) { return a.tape()->unary(std::sin(a.value()), a, std::cos(a.value())); }
Var cos(const Var& a) { return a.tape()->unary(std::cos(a.value()), a, -std::sin(a.value())); }
Var tanh(const Var& a) {
  const double t = std::tanh(a.value());
  return a.tape()->unary(t, a, 1.0 - t * t);
}
Var sqrt(const Var& a) {
  if (!(a.value() > 0.0)) throw NotDifferentiable("sqrt is not differentiable at x <= 0");
  const double r = std::sqrt(a.value());
  return a.tape()->unary(r, a, 0.5 / r);
}
Var square(const Var& a) { return a.tape()->unary(a.value() * a.value(), a, 2.0 * a.value()); }
Var abs(const Var& a) {
  if (a.value() == 0.0) throw NotDifferentiable("abs is not differentiable at 0");
  return a.tape()->unary(std::abs(a.value()), a, a.value() > 0.0 ? 1.0 : -1.0);
}

ValueAndGradient value_and_gradient(const LossFunction& loss, std::span<const double> params) {
  Tape tape;
  const VarRange leaves = tape.variables(params);
  const Var out = loss(tape, leaves);
  const std::vector<double> adjoint = tape.gradient(out);
  ValueAndGradient result{out.value(), {}};
  const auto first = adjoint.begin() + leaves.first();
  result.gradient.assign(first, first + static_cast<std::ptrdiff_t>(params.size()));
  return result;
}

}  // namespace mfgan::ad
