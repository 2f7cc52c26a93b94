#pragma once

#include <string>

namespace locus {

enum class LossKind { kAbsolute, kSquared };

/// Realized loss of prediction `pred` against outcome `y`.
double loss_value(LossKind kind, double pred, double y);

std::string loss_name(LossKind kind);
LossKind parse_loss(const std::string& name);

}  // namespace locus
