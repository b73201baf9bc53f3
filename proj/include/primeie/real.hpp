#pragma once

// Scalar precision for every numeric path in the library. The default build
// uses 32-bit reals; defining PRIMEIE_DOUBLE switches to 64-bit for gradient
// audits. The two variants live in distinct inline namespaces so both can be
// linked into one binary.

#ifdef PRIMEIE_DOUBLE
#define PRIMEIE_ABI f64
#else
#define PRIMEIE_ABI f32
#endif

namespace primeie {
inline namespace PRIMEIE_ABI {

#ifdef PRIMEIE_DOUBLE
using Real = double;
inline constexpr const char* kRealDtype = "f64";
#else
using Real = float;
inline constexpr const char* kRealDtype = "f32";
#endif

}  // namespace PRIMEIE_ABI
}  // namespace primeie
