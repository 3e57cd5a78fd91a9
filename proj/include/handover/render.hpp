#pragma once

#include <string>

namespace handover {

/// Decimal rendering with 12 significant digits ("%.12g"); all file and
/// JSON output goes through this so repeated runs are byte-identical.
std::string g12(double x);

/// The double value closest to the 12-significant-digit rendering.
double round12(double x);

}  // namespace handover
