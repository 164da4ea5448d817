#pragma once

#include <string>

namespace invlr {

enum class Activation { Identity, Relu, LeakyRelu, Tanh, Sigmoid };

inline constexpr double kLeakySlope = 0.01;

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

double activate(Activation a, double z);
/// Derivative with relu'(0) = 0 and leaky_relu'(0) = kLeakySlope.
double activate_derivative(Activation a, double z);

}  // namespace invlr
