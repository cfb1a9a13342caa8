#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace qdwell {

using Complex = std::complex<double>;

// All library errors derive from this; the CLI maps them onto exit codes.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised for malformed inputs (configs, tables, grids).
class InputError : public Error {
public:
  explicit InputError(const std::string& msg) : Error(msg) {}
};

// Raised when an otherwise valid computation fails numerically.
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

namespace constants {
inline constexpr double pi = 3.14159265358979323846;
// hbar*c in MeV*fm and hbar in MeV*s, used only at I/O boundaries.
inline constexpr double hbar_c_mev_fm = 197.3269804;
inline constexpr double hbar_mev_s = 6.582119569e-22;
}  // namespace constants

}  // namespace qdwell
