#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "duo/theory.hpp"

namespace duo {

enum class Direction { Input, Output };
enum class Color { Black, White };

std::string_view to_string(Direction d);
std::string_view to_string(Color c);

/// Metadata of one duotensor index. Black marks coordinates against the
/// fiducial elements themselves (probabilities), White marks expansion
/// coefficients.
struct IndexMeta {
  std::string label;
  Direction direction = Direction::Input;
  std::string type_name;
  Color color = Color::Black;
  int dim = 1;

  friend bool operator==(const IndexMeta&, const IndexMeta&) = default;
};

/// Dense real multi-index array. Values are stored row-major over the
/// index list (last index fastest). Indices are addressed by label.
class Duotensor {
 public:
  Duotensor() : values_{0.0} {}
  static Duotensor scalar(double value);
  /// Errors: DuplicatePort, IndexMismatch (value count).
  Duotensor(std::vector<IndexMeta> indices, std::vector<double> values);

  const std::vector<IndexMeta>& indices() const noexcept { return indices_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t rank() const noexcept { return indices_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  bool is_scalar() const noexcept { return indices_.empty(); }
  double scalar_value() const;

  std::optional<std::size_t> position(const std::string& label) const;
  const IndexMeta& index(const std::string& label) const;  // NoSuchPort

  double at(std::span<const int> multi_index) const;

 private:
  std::vector<IndexMeta> indices_;
  std::vector<double> values_;
};

/// Flips one index's color, contracting with g_bb (White to Black) or g_ww
/// (Black to White). Errors: NoSuchPort, TypeMismatch.
Duotensor recolor(const Duotensor& t, const std::string& label, Color target, const HoppingMetric& metric);

/// Sums over linked index pairs. Each link joins an Output and an Input of
/// the same type with opposite colors. The result keeps a's unlinked
/// indices followed by b's. Errors: NoSuchPort, ColorClash, TypeMismatch,
/// DirectionMismatch, DuplicatePort.
Duotensor contract(const Duotensor& a, const Duotensor& b,
                   std::span<const std::pair<std::string, std::string>> links);

/// Errors: DuplicatePort.
Duotensor outer(const Duotensor& a, const Duotensor& b);

/// Entrywise weighted sum of duotensors with identical index lists.
/// Errors: IndexMismatch.
Duotensor linear_combine(std::span<const std::pair<double, Duotensor>> terms);

/// Canonical coloring: inputs Black, outputs White. Errors: MissingMetric.
Duotensor to_standard_form(const Duotensor& t, const std::map<std::string, HoppingMetric>& metrics);

/// Recolors every index to `colors[i]` (matched by position).
Duotensor with_colors(const Duotensor& t, std::span<const Color> colors,
                      const std::map<std::string, HoppingMetric>& metrics);

/// Every index Black: entries are fiducial probabilities.
Duotensor to_all_black(const Duotensor& t, const std::map<std::string, HoppingMetric>& metrics);

/// Inputs White, outputs Black (states read as probability lists).
Duotensor to_evolution_form(const Duotensor& t, const std::map<std::string, HoppingMetric>& metrics);

/// Renames indices; labels missing from the map are kept.
Duotensor relabel(const Duotensor& t, const std::map<std::string, std::string>& renames);

/// Reorders the index list to `labels` (a permutation of the labels).
Duotensor reorder(const Duotensor& t, std::span<const std::string> labels);

/// The identity on one type between an input and an output of opposite
/// colors. Its values are the Kronecker delta whichever colors are chosen.
Duotensor identity_delta(const std::string& type_name, int k, const std::string& input_label,
                         const std::string& output_label, Color input_color = Color::White);

struct ProportionalityResult {
  enum class Kind { Proportional, NotProportional, ZeroDenominator, BothZero };
  Kind kind = Kind::NotProportional;
  double k = 0.0;
};

std::string_view to_string(ProportionalityResult::Kind kind);

/// Tests a = k * b. k is the least-squares estimate, verified entrywise by
/// |a_i - k b_i| <= rel_tol * max(|a|inf, |k b|inf) + 1e-12.
/// Errors: IndexMismatch.
ProportionalityResult proportionality(const Duotensor& a, const Duotensor& b, double rel_tol = 1e-8);

/// Applies a change of fiducials to every index whose type has an entry
/// in `transforms`. Black inputs use P^-1, White inputs E^T, Black outputs
/// E^-1 and White outputs P^T.
Duotensor transform_duotensor(const Duotensor& t, const std::map<std::string, FiducialTransform>& transforms);

/// Largest absolute entrywise difference; requires identical index lists.
double max_abs_difference(const Duotensor& a, const Duotensor& b);

inline constexpr double kZeroFloor = 1e-12;

}  // namespace duo
