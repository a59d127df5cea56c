#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace duo {

enum class Backend { Classical, Quantum };

std::string_view to_string(Backend backend);

/// A wire type. `k` is the fiducial-set size, `backend_dim` the number of
/// classical outcomes or the Hilbert-space dimension.
struct SystemType {
  std::string name;
  int k = 1;
  int backend_dim = 1;

  friend bool operator==(const SystemType&, const SystemType&) = default;
};

class Theory;

/// Several types grouped into one composite system. Nested composites are
/// always stored flattened, so grouping is associative.
struct CompositeType {
  std::vector<std::string> factors;

  static CompositeType of(std::vector<std::string> names) { return {std::move(names)}; }
  CompositeType operator*(const CompositeType& other) const;

  long k(const Theory& theory) const;
  long backend_dim(const Theory& theory) const;

  friend bool operator==(const CompositeType&, const CompositeType&) = default;
};

struct ClassicalFiducials {
  std::vector<Eigen::VectorXd> preparations;  // probability vectors
  std::vector<Eigen::VectorXd> effects;       // response vectors, entries in [0, 1]
};

struct QuantumFiducials {
  std::vector<Eigen::MatrixXcd> preparations;  // positive, trace <= 1
  std::vector<Eigen::MatrixXcd> effects;       // 0 <= P <= I
};

using FiducialElements = std::variant<ClassicalFiducials, QuantumFiducials>;

struct FiducialSet {
  std::string type_name;
  FiducialElements elements;

  std::size_t size() const;
};

struct HoppingMetric {
  std::string type_name;
  Eigen::MatrixXd g_bb;  // g_bb(i, j): fiducial preparation j then fiducial effect i
  Eigen::MatrixXd g_ww;  // inverse of g_bb
  double condition_estimate = 1.0;
};

/// Old fiducials in terms of new ones: old effect i = sum_j E(i, j) new
/// effect j, and likewise for preparations with P.
struct FiducialTransform {
  std::string type_name;
  Eigen::MatrixXd effect_matrix;
  Eigen::MatrixXd prep_matrix;
  Eigen::MatrixXd effect_inverse;
  Eigen::MatrixXd prep_inverse;

  /// Validates invertibility and caches the inverses (SingularTransform).
  static FiducialTransform make(std::string type_name, Eigen::MatrixXd effect_matrix,
                                Eigen::MatrixXd prep_matrix);
  static FiducialTransform identity(std::string type_name, int k);
};

// Backend-native operation data. Matrices act on composite spaces ordered
// little-endian over the listed port types.

struct ClassicalOperation {
  std::vector<std::string> input_types;
  std::vector<std::string> output_types;
  Eigen::MatrixXd z;  // (prod N_out) x (prod N_in)
};

struct QuantumOperation {
  std::vector<std::string> input_types;
  std::vector<std::string> output_types;
  std::vector<Eigen::MatrixXcd> kraus;  // each (prod N_out) x (prod N_in)
};

using BackendOperation = std::variant<ClassicalOperation, QuantumOperation>;

const std::vector<std::string>& input_types(const BackendOperation& op);
const std::vector<std::string>& output_types(const BackendOperation& op);

/// One apparatus (fixed setting) with its outcome family.
struct OperationDecl {
  std::string apparatus_id;
  std::string setting;
  std::vector<std::string> input_types;
  std::vector<std::string> output_types;
  std::map<std::string, BackendOperation> outcomes;
};

/// Outcome label denoting the union of all declared outcomes.
inline constexpr std::string_view kTotalOutcome = "I";

/// Apparatus ids of the standard closing devices for a type.
std::string closing_preparation_id(const std::string& type_name);
std::string closing_effect_id(const std::string& type_name);
bool is_closing_apparatus(const std::string& apparatus_id);

/// A probabilistic theory over typed systems. Build it with register_type
/// and declare_operation, then share it as const.
class Theory {
 public:
  explicit Theory(Backend backend) : backend_(backend) {}

  Backend backend() const noexcept { return backend_; }

  /// Registers a type with default fiducials when `fiducials` is empty.
  /// Errors: DuplicateType, DependentFiducials, UnphysicalFiducial,
  /// SingularMetric.
  const SystemType& register_type(const std::string& name, int backend_dim,
                                  std::optional<FiducialElements> fiducials = std::nullopt);

  bool has_type(const std::string& name) const { return types_.count(name) != 0; }
  const SystemType& type(const std::string& name) const;
  const std::map<std::string, SystemType>& types() const noexcept { return types_; }
  const FiducialSet& fiducials(const std::string& name) const;
  const HoppingMetric& metric(const std::string& name) const;
  std::map<std::string, HoppingMetric> metrics() const { return metrics_; }

  /// Declares an apparatus. Every outcome is validated against the
  /// backend's shape and physicality rules.
  void declare_operation(OperationDecl decl);
  const OperationDecl* find_operation(const std::string& apparatus_id) const;
  const std::map<std::string, OperationDecl>& operations() const noexcept { return operations_; }

  /// Backend data for one outcome of an apparatus. The label "I" resolves to
  /// the coarse-grained total when not declared explicitly; an empty label
  /// picks the only outcome or the total. Closing devices resolve to the
  /// type's standard closure. Errors: MissingOperation.
  BackendOperation resolve(const std::string& apparatus_id, const std::string& outcome_label) const;

  /// Overrides the standard closure for a type.
  void set_standard_closure(const std::string& type_name, BackendOperation preparation,
                            BackendOperation effect);

  /// Total (coarse-grained) outcome of an apparatus: the summed Z matrix or
  /// the union of Kraus sets.
  BackendOperation total_outcome(const std::string& apparatus_id) const;

  /// True iff the total outcome is normalized: a stochastic Z or a
  /// trace-preserving Kraus set, to `tol`.
  bool is_complete_family(const std::string& apparatus_id, double tol = 1e-10) const;

 private:
  friend Theory change_fiducials(const Theory& theory, const std::string& type_name,
                                 const FiducialTransform& transform);

  void install_type(const std::string& name, int backend_dim, FiducialElements elements);

  Backend backend_;
  std::map<std::string, SystemType> types_;
  std::map<std::string, FiducialSet> fiducials_;
  std::map<std::string, HoppingMetric> metrics_;
  std::map<std::string, OperationDecl> operations_;
  std::map<std::string, std::pair<BackendOperation, BackendOperation>> closures_;
};

/// Default fiducial elements for a type of the given backend and dimension.
FiducialElements default_fiducials(Backend backend, int backend_dim);

/// Validates a fiducial set (counts, physicality, linear independence).
void validate_fiducials(Backend backend, int backend_dim, const FiducialElements& elements);

/// Recomputes the hopping metric of a registered type from its fiducials.
/// Errors: SingularMetric when the condition estimate exceeds 1e12.
HoppingMetric compute_hopping_metric(const Theory& theory, const std::string& type_name);
HoppingMetric compute_hopping_metric(const FiducialSet& fiducials);

/// A new theory whose fiducials for `type_name` are the transformed sets.
Theory change_fiducials(const Theory& theory, const std::string& type_name,
                        const FiducialTransform& transform);

/// The transform taking the fiducials of `type_name` to `target`, i.e. the
/// (E, P) with old = E * new for effects and old = P * new for preparations.
FiducialTransform transform_between(const Theory& theory, const std::string& type_name,
                                    const FiducialElements& target);

inline constexpr double kMaxMetricCondition = 1e12;
inline constexpr double kMinRelativeSingularValue = 1e-9;

}  // namespace duo
