#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flr {

/// A leading principal submatrix [K]_m was required to be nonsingular and
/// is not; carries the dimension at which the factorization failed.
class singular_error : public std::runtime_error {
 public:
  singular_error(std::size_t m, const std::string& what)
      : std::runtime_error(what), m_(m) {}
  std::size_t dimension() const noexcept { return m_; }

 private:
  std::size_t m_;
};

/// External data could not be ingested: shape mismatch, malformed cell,
/// unusable grid. The message names the offending location.
class ingest_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flr
