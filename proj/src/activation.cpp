#include "hashnets/activation.hpp"

#include <algorithm>
#include <cmath>

#include "hashnets/error.hpp"

namespace hashnets {

double Activation::value(double a) const {
  switch (kind) {
    case Kind::Relu: return a > 0.0 ? a : 0.0;
    case Kind::LeakyRelu: return a > 0.0 ? a : slope * a;
    case Kind::Linear: return a;
    case Kind::Tanh: return std::tanh(a);
  }
  return 0.0;
}

double Activation::derivative(double a) const {
  switch (kind) {
    case Kind::Relu: return a > 0.0 ? 1.0 : 0.0;
    case Kind::LeakyRelu: return a > 0.0 ? 1.0 : slope;
    case Kind::Linear: return 1.0;
    case Kind::Tanh: {
      const double t = std::tanh(a);
      return 1.0 - t * t;
    }
  }
  return 0.0;
}

double Activation::lipschitz() const {
  switch (kind) {
    case Kind::LeakyRelu: return std::max(1.0, std::abs(slope));
    default: return 1.0;
  }
}

std::string Activation::name() const {
  switch (kind) {
    case Kind::Relu: return "relu";
    case Kind::LeakyRelu: return "leaky-relu";
    case Kind::Linear: return "linear";
    case Kind::Tanh: return "tanh";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu();
  if (name == "linear") return Activation::linear();
  if (name == "tanh") return Activation::tanh();
  if (name.rfind("leaky-relu", 0) == 0) {
    double alpha = 0.01;
    if (auto pos = name.find(':'); pos != std::string::npos) alpha = std::stod(name.substr(pos + 1));
    return Activation::leaky_relu(alpha);
  }
  throw InvalidInput("unknown activation '" + name + "'");
}

}  // namespace hashnets
