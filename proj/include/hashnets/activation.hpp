#pragma once

#include <string>

namespace hashnets {

/// Scalar activation. Relu, LeakyRelu and Linear are piecewise linear
/// (second derivative zero almost everywhere); Tanh is smooth and only
/// usable where no Hessian is required.
struct Activation {
  enum class Kind { Relu, LeakyRelu, Linear, Tanh };

  Kind kind = Kind::Relu;
  double slope = 0.0;  // negative-side slope for LeakyRelu

  static Activation relu() { return {Kind::Relu, 0.0}; }
  static Activation leaky_relu(double alpha) { return {Kind::LeakyRelu, alpha}; }
  static Activation linear() { return {Kind::Linear, 1.0}; }
  static Activation tanh() { return {Kind::Tanh, 0.0}; }

  double value(double a) const;
  /// Derivative; the subgradient at the ReLU kink is taken as the
  /// negative-side slope (0 for ReLU).
  double derivative(double a) const;
  double lipschitz() const;
  bool piecewise_linear() const { return kind != Kind::Tanh; }
  /// Growth power p with |phi'(z)| <= L |z|^p; 0 for bounded derivatives.
  double growth_power() const { return 0.0; }

  std::string name() const;
};

Activation parse_activation(const std::string& name);

}  // namespace hashnets
