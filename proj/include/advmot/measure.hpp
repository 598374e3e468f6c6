#ifndef ADVMOT_MEASURE_HPP_
#define ADVMOT_MEASURE_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace advmot {

using Point = Eigen::VectorXd;

/// Raised for malformed user input (bad rows, labels, weights, configs).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a requested problem exceeds a configured size cap.
class ResourceCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One atom (x, i) of X x [K] with its mass. Labels are 1-based.
struct LabeledPoint {
  Point x;
  int label = 1;
  double weight = 0.0;
};

/// Exact coordinate ordering; used for atom sorting and duplicate detection.
bool coords_less(const Point& a, const Point& b);
bool coords_equal(const Point& a, const Point& b);

/// Finite positive measure on X x [K].
///
/// Atoms are kept sorted by (label, coordinates) and duplicate (x, label)
/// pairs are merged by summing weights, so atom indices are reproducible.
/// Weights are stored as given; nothing is normalized implicitly.
class LabeledMeasure {
 public:
  LabeledMeasure() = default;

  /// Validates, sorts and merges. `num_classes` must be >= 2.
  static LabeledMeasure from_points(std::vector<LabeledPoint> points, int num_classes);

  const std::vector<LabeledPoint>& atoms() const { return atoms_; }
  const LabeledPoint& atom(std::size_t i) const { return atoms_[i]; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  int num_classes() const { return num_classes_; }
  int dim() const { return dim_; }

  double total_mass() const;
  double class_mass(int label) const;
  /// Indices (into atoms()) of the atoms carrying `label`.
  std::vector<std::size_t> class_indices(int label) const;

  /// Atoms of one class; may be empty (mass 0).
  LabeledMeasure slice(int label) const;

  /// Returns a copy with every weight multiplied by `factor` (> 0).
  LabeledMeasure scaled(double factor) const;

 private:
  std::vector<LabeledPoint> atoms_;
  int num_classes_ = 2;
  int dim_ = 0;
};

/// Unlabeled finite measure on X; atoms with bit-equal coordinates are merged.
struct PointMeasure {
  std::vector<Point> points;
  std::vector<double> weights;

  void add(const Point& x, double w);
  double mass() const;
  /// Weight at exactly x (0 if absent).
  double weight_at(const Point& x) const;
  std::size_t size() const { return points.size(); }
};

/// The slice mu_i over X, kept as a LabeledMeasure whose atoms all carry `label`.
LabeledMeasure class_slice(const LabeledMeasure& m, int label);

/// Atoms 0..n-1 of a measure plus one ghost atom at index n.
class GhostIndex {
 public:
  explicit GhostIndex(std::size_t num_atoms) : n_(num_atoms) {}
  std::size_t size() const { return n_ + 1; }
  std::size_t ghost() const { return n_; }
  bool is_ghost(std::size_t i) const { return i == n_; }
  std::size_t num_atoms() const { return n_; }

 private:
  std::size_t n_;
};

using SubsetMask = std::uint32_t;

inline bool mask_contains(SubsetMask mask, int label) { return (mask >> (label - 1)) & 1u; }
inline int mask_size(SubsetMask mask) { return __builtin_popcount(mask); }
std::vector<int> mask_labels(SubsetMask mask);
std::string mask_to_string(SubsetMask mask);

/// All nonempty subsets of [K] as bitmasks (bit i-1 <-> class i), ordered by
/// popcount then numeric value, together with the membership lists S_K(i).
struct SubsetTable {
  int num_classes = 0;
  std::vector<SubsetMask> masks;
  /// containing[i-1] lists the positions (into masks) of subsets containing i.
  std::vector<std::vector<std::size_t>> containing;
};

inline constexpr int kMaxClasses = 16;

SubsetTable enumerate_subsets(int num_classes);

/// A parsed input row, before validation.
struct MeasureRow {
  std::vector<double> coords;
  int label = 0;
  std::optional<double> weight;
};

/// Builds a measure from rows. When `num_classes` is absent it is taken as the
/// largest label present (at least 2). Weights default to 1/n.
LabeledMeasure load_measure(const std::vector<MeasureRow>& rows,
                            std::optional<int> num_classes = std::nullopt);

/// Delimited text with header "x0,...,x{d-1},label[,weight]".
std::vector<MeasureRow> parse_measure_csv(const std::string& text);
LabeledMeasure read_measure_csv(const std::string& path, std::optional<int> num_classes = std::nullopt);
std::string measure_to_csv(const LabeledMeasure& m);

}  // namespace advmot

#endif  // ADVMOT_MEASURE_HPP_
