#pragma once

#include <stdexcept>
#include <string>

namespace thinobs {

/// Raised on violated preconditions: bad grid requests, inadmissible
/// homogeneities, spheres leaving the domain, malformed files.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a verification routine finds its node-wise certificate
/// (w * Lap_h w >= -tol) violated. Such inputs are rejected, never reported.
class CertificateError : public Error {
 public:
  using Error::Error;
};

}  // namespace thinobs
