#pragma once

#include <memory>
#include <utility>

#include "sca/dist.hpp"
#include "sca/enumerate.hpp"
#include "sca/sca.hpp"
#include "sca/word.hpp"

namespace sca {

/// One-step window semantics of a stochastic global map. Everything the
/// iterate recursion and the equality sweeps need, abstracted so that
/// rescaled automata can be evaluated without materializing their tables.
class WindowKernel {
 public:
  virtual ~WindowKernel() = default;

  virtual const Alphabet& state_alphabet() const = 0;

  /// Inclusive range of context cells one_step needs for `w`.
  virtual std::pair<Cell, Cell> context_span(const Window& w) const = 0;

  virtual CylinderDist one_step(const Word& context, const Window& w, ExecMode mode) const = 0;

  CylinderDist one_step(const Word& context, const Window& w) const {
    return one_step(context, w, default_exec_mode());
  }
};

/// Direct kernel over an automaton: exact counting over the random-word cone.
class ScaKernel : public WindowKernel {
 public:
  using WindowKernel::one_step;
  explicit ScaKernel(Sca a) : a_(std::move(a)) {}

  const Sca& automaton() const { return a_; }
  const Alphabet& state_alphabet() const override { return a_.states(); }

  std::pair<Cell, Cell> context_span(const Window& w) const override {
    const int rho = radius(a_);
    return {w.z - rho, w.z + w.L - 1 + rho};
  }

  CylinderDist one_step(const Word& context, const Window& w, ExecMode mode) const override;

 private:
  Sca a_;
};

}  // namespace sca
