#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pmlo {

// All recoverable failures carry a stable diagnostic code next to the
// human-readable message, so the CLI can map them onto exit statuses and
// tests can assert on the exact failure class.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
  throw Error(std::move(code), message);
}

namespace errc {
inline constexpr const char* syntax = "SYNTAX";
inline constexpr const char* scope = "SCOPE";
inline constexpr const char* l_diff = "L_DIFF_UNDECIDABLE";
inline constexpr const char* prob_sum = "PROB_SUM";
inline constexpr const char* zero_prob = "ZERO_PROB";
inline constexpr const char* dead_end = "DEAD_END";
inline constexpr const char* unknown_ref = "UNKNOWN_REF";
inline constexpr const char* unsupported_reduction = "UNSUPPORTED_REDUCTION";
inline constexpr const char* not_weak = "NOT_WEAK_CONVERTIBLE";
inline constexpr const char* state_blowup = "STATE_BLOWUP";
inline constexpr const char* not_markov = "NOT_MARKOV";
inline constexpr const char* unsupported = "UNSUPPORTED";
inline constexpr const char* alphabet_mismatch = "ALPHABET_MISMATCH";
inline constexpr const char* not_a_run = "NOT_A_RUN";
inline constexpr const char* clock_overlap = "CLOCK_OVERLAP";
inline constexpr const char* bad_model = "BAD_MODEL";
inline constexpr const char* io = "IO";
}  // namespace errc

}  // namespace pmlo
