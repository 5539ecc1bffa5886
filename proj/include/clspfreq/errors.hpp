#ifndef CLSPFREQ_ERRORS_HPP
#define CLSPFREQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace clspfreq {

/// Invalid parameters or configuration. CLI exit code 2.
class config_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data. CLI exit code 3.
class data_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a trustworthy result. CLI exit code 4.
class numerical_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Signal without AC content where the SNR needs one.
class undefined_snr_error : public config_error {
public:
  using config_error::config_error;
};

/// Constant signal: the information about the frequency is zero.
class zero_information_error : public config_error {
public:
  using config_error::config_error;
};

/// Trigonometric design matrix too ill-conditioned for a fit.
class degenerate_design_error : public numerical_error {
public:
  degenerate_design_error(const std::string &what, double frequency,
                          int harmonic, double condition)
      : numerical_error(what), frequency_(frequency), harmonic_(harmonic),
        condition_(condition) {}

  double frequency() const noexcept { return frequency_; }
  /// Harmonic index whose regressor is closest to the span of the others.
  int harmonic() const noexcept { return harmonic_; }
  double condition() const noexcept { return condition_; }

private:
  double frequency_;
  int harmonic_;
  double condition_;
};

/// Gram matrix numerically singular at (f, K).
class singular_gram_error : public numerical_error {
public:
  singular_gram_error(const std::string &what, double frequency, int K,
                      double condition)
      : numerical_error(what), frequency_(frequency), K_(K),
        condition_(condition) {}

  double frequency() const noexcept { return frequency_; }
  int harmonics() const noexcept { return K_; }
  double condition() const noexcept { return condition_; }

private:
  double frequency_;
  int K_;
  double condition_;
};

/// Process exit code associated with an exception type.
inline int exit_code_for(const std::exception &e) noexcept {
  if (dynamic_cast<const config_error *>(&e)) return 2;
  if (dynamic_cast<const data_error *>(&e)) return 3;
  if (dynamic_cast<const numerical_error *>(&e)) return 4;
  return 1;
}

} // namespace clspfreq

#endif
