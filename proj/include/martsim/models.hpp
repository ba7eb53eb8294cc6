#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "martsim/coefficients.hpp"
#include "martsim/rng.hpp"

namespace martsim {

// Which innovations of the original history are replaced by the independent
// copy when evaluating the coupled trajectory.
enum class Coupling {
  None,
  ReplaceIndexZero,  // single innovation at index 0
  ReplaceAllPast,    // every innovation at index <= 0
};

std::string coupling_name(Coupling c);

// Innovation view used by every evaluation kernel. Resolution order per
// index: single-slot override, then futures stream (indices >= future_begin),
// then the coupled replacement, then the base stream.
struct SourceView {
  const InnovationStream* base = nullptr;
  const InnovationStream* prime = nullptr;
  Coupling coupling = Coupling::None;
  const InnovationStream* future = nullptr;
  int64_t future_begin = 0;
  bool has_slot = false;
  int64_t slot_index = 0;
  double slot_value = 0.0;

  double at(int64_t i) const {
    if (has_slot && i == slot_index) return slot_value;
    if (future != nullptr && i >= future_begin) return future->at(i);
    if (coupling == Coupling::ReplaceIndexZero && i == 0) return prime->at(i);
    if (coupling == Coupling::ReplaceAllPast && i <= 0) return prime->at(i);
    return base->at(i);
  }
};

enum class Transform { AbsoluteValue, Tanh, SoftThreshold };
enum class IrfKernel { Ar1, ContractingSine };

std::string transform_name(Transform t);
std::string kernel_name(IrfKernel k);

struct LinearIidModel {
  CoefficientSequence coeffs;
};

struct LipschitzTransformModel {
  CoefficientSequence coeffs;
  Transform transform = Transform::Tanh;
  double threshold = 0.5;  // soft-threshold shift
  double centering = 0.0;  // frozen at construction so g has mean exactly zero
};

struct IrfModel {
  IrfKernel kernel = IrfKernel::Ar1;
  double rho = 0.0;
  int burn_in = 0;
  int64_t chain_start = 0;  // first innovation index the chain absorbs
  double initial_state = 0.0;
  double mean_offset = 0.0;  // stationary mean, analytic or frozen-estimated
  // geometric-moment contraction fits E|G - G*|^q <= C r^n, frozen at
  // construction with a fixed calibration seed
  double gmc_c2 = 0.0, gmc_r2 = 0.0;
  double gmc_c4 = 0.0, gmc_r4 = 0.0;
};

struct LinearDependentModel {
  CoefficientSequence coeffs;
  IrfModel inner;
};

using ModelVariant =
    std::variant<LinearIidModel, LipschitzTransformModel, IrfModel, LinearDependentModel>;

// One stationary causal process X_t = g(..., eps_{t-1}, eps_t) with mean zero.
// Immutable after construction; safe to share across workers.
class ProcessModel {
 public:
  static ProcessModel linear_iid(CoefficientSequence coeffs, InnovationSpec innovations);
  static ProcessModel lipschitz_transform(CoefficientSequence coeffs, Transform transform,
                                          InnovationSpec innovations, double threshold = 0.5);
  static ProcessModel iterated_function(IrfKernel kernel, double rho, InnovationSpec innovations,
                                        int burn_in = -1);
  static ProcessModel linear_dependent(CoefficientSequence coeffs, IrfKernel kernel, double rho,
                                       InnovationSpec innovations, int burn_in = -1);

  const InnovationSpec& innovations() const { return innovations_; }
  const ModelVariant& variant() const { return variant_; }
  double analysis_q() const { return analysis_q_; }
  void set_analysis_q(double q);

  std::string id() const;
  bool is_linear_iid() const { return std::holds_alternative<LinearIidModel>(variant_); }
  // Coefficient sequence when the model has a linear filter layer.
  const CoefficientSequence* filter_coefficients() const;
  const IrfModel* irf() const;

  // Copy with a different fixed initial chain state (iterated-function models).
  ProcessModel with_initial_state(double x0) const;

 private:
  ProcessModel(InnovationSpec innovations, ModelVariant v);

  InnovationSpec innovations_;
  ModelVariant variant_;
  double analysis_q_ = 2.0;
};

// Default burn-in so contraction error is negligible: ceil(200 / log(1/|rho|)).
int default_burn_in(double rho);

struct PathResult {
  std::vector<double> x;  // X_1..X_n
  std::vector<double> s;  // S_0..S_n, S_0 = 0
};

PathResult generate_path(const ProcessModel& model, int64_t n, const InnovationStream& stream);

struct ThetaValue {
  double value = 0.0;
  bool is_bound = false;  // true: upper bound, not the exact projection norm
};

// Exact projection norm for linear-iid; flagged upper bound for transform and
// iterated-function models; absent for linear-dependent (estimate instead).
std::optional<ThetaValue> analytic_theta(const ProcessModel& model, int64_t n, double q);

}  // namespace martsim
