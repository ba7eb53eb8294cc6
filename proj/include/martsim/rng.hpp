#pragma once

#include <cstdint>
#include <string>

namespace martsim {

inline constexpr uint64_t kGolden64 = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer
constexpr uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Substream derivation. Chain calls to derive from (seed, tag, tag, ...).
constexpr uint64_t derive_key(uint64_t key, uint64_t tag) {
  return mix64(key ^ (mix64(tag + kGolden64) + kGolden64));
}

// Keyed counter hash: one 64-bit word per (key, counter) cell, no sequential
// state. Counters are free to be negative (two's complement).
constexpr uint64_t cell_bits(uint64_t key, uint64_t counter) {
  const uint64_t h = key ^ mix64(counter * kGolden64 + 0x6A09E667F3BCC909ull);
  return mix64(h + kGolden64);
}

// Uniform in the open interval (0,1).
constexpr double u01_from_bits(uint64_t b) {
  return (static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53;
}

enum class InnovationFamily {
  StandardNormal,
  CenteredUniform,      // uniform on [-sqrt(3), sqrt(3)]
  StudentT,             // rescaled to unit variance, dof > 4
  CenteredExponential,  // Exp(1) - 1
};

struct InnovationSpec {
  InnovationFamily family = InnovationFamily::StandardNormal;
  int t_dof = 0;

  static InnovationSpec standard_normal() { return {InnovationFamily::StandardNormal, 0}; }
  static InnovationSpec centered_uniform() { return {InnovationFamily::CenteredUniform, 0}; }
  static InnovationSpec student_t(int dof);
  static InnovationSpec centered_exponential() { return {InnovationFamily::CenteredExponential, 0}; }

  // Largest moment order guaranteed finite: dof - 1 for student-t, +inf otherwise.
  double q_max() const;
  bool symmetric() const { return family != InnovationFamily::CenteredExponential; }
  std::string name() const;
};

// Exact L^q norm of one innovation via closed-form absolute moments.
// Throws std::domain_error when q < 1 or q exceeds q_max.
double analytic_lq_norm(const InnovationSpec& spec, double q);

// ||eps - eps'||_q for two independent copies. Closed form except student-t,
// where the triangle-inequality bound 2*||eps||_q is returned with exact=false.
struct DiffLqNorm {
  double value = 0.0;
  bool exact = true;
};
DiffLqNorm analytic_diff_lq_norm(const InnovationSpec& spec, double q);

enum class CopyTag : uint64_t { Original = 0, Prime = 1 };

// Deterministic, integer-indexed i.i.d. innovation source. The value at index
// i is a pure function of (seed, copy_tag, i); negative indices encode the
// infinite past. Streams with equal seed and different copy_tag are
// statistically independent.
class InnovationStream {
 public:
  InnovationStream(InnovationSpec spec, uint64_t seed, CopyTag tag = CopyTag::Original);

  double at(int64_t i) const;
  double uniform(int64_t i, int lane = 0) const;

  const InnovationSpec& spec() const { return spec_; }
  uint64_t seed() const { return seed_; }
  CopyTag tag() const { return tag_; }

 private:
  InnovationSpec spec_;
  uint64_t seed_ = 0;
  CopyTag tag_ = CopyTag::Original;
  uint64_t key_ = 0;
};

double innovation_at(const InnovationStream& stream, int64_t i);

}  // namespace martsim
