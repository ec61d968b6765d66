#pragma once

#include <stdexcept>
#include <string>

namespace ifp {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct SingularBasis : Error {
  explicit SingularBasis(const std::string& what = "basis is numerically rank deficient") : Error(what) {}
};

struct NonConvergence : Error {
  explicit NonConvergence(const std::string& what) : Error(what) {}
};

struct DimensionTooLarge : Error {
  explicit DimensionTooLarge(const std::string& what) : Error(what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

struct SingularGram : Error {
  explicit SingularGram(const std::string& what = "Gram matrix is singular or too ill conditioned") : Error(what) {}
};

struct PerfectCsiNoOp : Error {
  explicit PerfectCsiNoOp() : Error("channel estimation is a no-op under perfect CSI") {}
};

struct ZeroPrecoder : Error {
  explicit ZeroPrecoder() : Error("precoder is identically zero; cannot satisfy the power constraint") {}
};

struct NonPositiveInput : Error {
  explicit NonPositiveInput(const std::string& what = "vector must be entrywise positive") : Error(what) {}
};

struct NonSpdCoupling : Error {
  explicit NonSpdCoupling(const std::string& what = "coupling matrix is not symmetric positive definite") : Error(what) {}
};

struct SingularCoupling : Error {
  explicit SingularCoupling(const std::string& what = "coupling matrix is singular") : Error(what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace ifp
