#include "advmot/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace advmot {

bool coords_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

bool coords_equal(const Point& a, const Point& b) {
  return a.size() == b.size() && std::equal(a.data(), a.data() + a.size(), b.data());
}

LabeledMeasure LabeledMeasure::from_points(std::vector<LabeledPoint> points, int num_classes) {
  if (num_classes < 2) throw InputError("number of classes must be at least 2");
  if (points.empty()) throw InputError("empty input: a measure needs at least one atom");
  const auto dim = points.front().x.size();
  for (const auto& p : points) {
    if (p.x.size() != dim) throw InputError("dimension mismatch between atoms");
    if (p.label < 1 || p.label > num_classes) {
      throw InputError("label out of range: " + std::to_string(p.label) + " not in 1.." +
                       std::to_string(num_classes));
    }
    if (!(p.weight >= 0.0) || !std::isfinite(p.weight)) throw InputError("negative or non-finite weight");
    if (!p.x.allFinite()) throw InputError("non-finite coordinate");
  }

  std::stable_sort(points.begin(), points.end(), [](const LabeledPoint& a, const LabeledPoint& b) {
    if (a.label != b.label) return a.label < b.label;
    return coords_less(a.x, b.x);
  });

  LabeledMeasure m;
  m.num_classes_ = num_classes;
  m.dim_ = static_cast<int>(dim);
  for (auto& p : points) {
    if (!m.atoms_.empty() && m.atoms_.back().label == p.label && coords_equal(m.atoms_.back().x, p.x)) {
      m.atoms_.back().weight += p.weight;
    } else {
      m.atoms_.push_back(std::move(p));
    }
  }
  if (!(m.total_mass() > 0.0)) throw InputError("total mass must be positive");
  return m;
}

double LabeledMeasure::total_mass() const {
  // Summed class by class so that the class masses add up to this exactly.
  double total = 0.0;
  for (int i = 1; i <= num_classes_; ++i) total += class_mass(i);
  return total;
}

double LabeledMeasure::class_mass(int label) const {
  double s = 0.0;
  for (const auto& a : atoms_)
    if (a.label == label) s += a.weight;
  return s;
}

std::vector<std::size_t> LabeledMeasure::class_indices(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i].label == label) out.push_back(i);
  return out;
}

LabeledMeasure LabeledMeasure::scaled(double factor) const {
  LabeledMeasure m = *this;
  for (auto& a : m.atoms_) a.weight *= factor;
  return m;
}

LabeledMeasure LabeledMeasure::slice(int label) const {
  if (label < 1 || label > num_classes_) throw InputError("class index out of range");
  LabeledMeasure out;
  out.num_classes_ = num_classes_;
  out.dim_ = dim_;
  for (const auto& a : atoms_)
    if (a.label == label) out.atoms_.push_back(a);
  return out;
}

void PointMeasure::add(const Point& x, double w) {
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (coords_equal(points[k], x)) {
      weights[k] += w;
      return;
    }
  }
  points.push_back(x);
  weights.push_back(w);
}

double PointMeasure::mass() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double PointMeasure::weight_at(const Point& x) const {
  for (std::size_t k = 0; k < points.size(); ++k)
    if (coords_equal(points[k], x)) return weights[k];
  return 0.0;
}

LabeledMeasure class_slice(const LabeledMeasure& m, int label) { return m.slice(label); }

std::vector<int> mask_labels(SubsetMask mask) {
  std::vector<int> out;
  for (int i = 1; i <= kMaxClasses; ++i)
    if (mask_contains(mask, i)) out.push_back(i);
  return out;
}

std::string mask_to_string(SubsetMask mask) {
  std::string s = "{";
  bool first = true;
  for (int i : mask_labels(mask)) {
    if (!first) s += ",";
    s += std::to_string(i);
    first = false;
  }
  return s + "}";
}

SubsetTable enumerate_subsets(int num_classes) {
  if (num_classes < 2 || num_classes > kMaxClasses) {
    throw InputError("number of classes must lie in 2.." + std::to_string(kMaxClasses));
  }
  SubsetTable t;
  t.num_classes = num_classes;
  const SubsetMask full = (SubsetMask{1} << num_classes) - 1;
  t.masks.reserve(full);
  for (SubsetMask s = 1; s <= full; ++s) t.masks.push_back(s);
  std::stable_sort(t.masks.begin(), t.masks.end(), [](SubsetMask a, SubsetMask b) {
    const int pa = mask_size(a), pb = mask_size(b);
    return pa != pb ? pa < pb : a < b;
  });
  t.containing.resize(num_classes);
  for (std::size_t k = 0; k < t.masks.size(); ++k)
    for (int i = 1; i <= num_classes; ++i)
      if (mask_contains(t.masks[k], i)) t.containing[i - 1].push_back(k);
  return t;
}

LabeledMeasure load_measure(const std::vector<MeasureRow>& rows, std::optional<int> num_classes) {
  if (rows.empty()) throw InputError("empty input: no data rows");
  const std::size_t dim = rows.front().coords.size();
  int max_label = 0;
  for (const auto& r : rows) {
    if (r.coords.size() != dim) throw InputError("dimension mismatch between rows");
    if (r.label < 1) throw InputError("label out of range: labels are 1-based");
    if (r.weight && *r.weight < 0.0) throw InputError("negative weight");
    max_label = std::max(max_label, r.label);
  }
  const int k = num_classes.value_or(std::max(2, max_label));
  const double uniform = 1.0 / static_cast<double>(rows.size());
  std::vector<LabeledPoint> pts;
  pts.reserve(rows.size());
  for (const auto& r : rows) {
    LabeledPoint p;
    p.x = Eigen::Map<const Point>(r.coords.data(), static_cast<Eigen::Index>(dim));
    p.label = r.label;
    p.weight = r.weight.value_or(uniform);
    pts.push_back(std::move(p));
  }
  return LabeledMeasure::from_points(std::move(pts), k);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  }
}

}  // namespace

std::vector<MeasureRow> parse_measure_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) throw InputError("empty input: missing header");

  std::size_t dim = 0;
  while (dim < header.size() && header[dim] == "x" + std::to_string(dim)) ++dim;
  if (dim == 0) throw InputError("header must start with x0");
  if (dim >= header.size() || header[dim] != "label") throw InputError("header must contain 'label' after coordinates");
  const bool has_weight = header.size() == dim + 2 && header[dim + 1] == "weight";
  if (header.size() != dim + 1 && !has_weight) throw InputError("unexpected header columns");

  std::vector<MeasureRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw InputError("line " + std::to_string(line_no) + ": dimension mismatch (expected " +
                       std::to_string(header.size()) + " fields)");
    }
    MeasureRow r;
    r.coords.reserve(dim);
    for (std::size_t k = 0; k < dim; ++k) r.coords.push_back(parse_double(fields[k], line_no));
    const double label = parse_double(fields[dim], line_no);
    if (label != std::floor(label)) throw InputError("line " + std::to_string(line_no) + ": label must be an integer");
    r.label = static_cast<int>(label);
    if (has_weight && !fields[dim + 1].empty()) r.weight = parse_double(fields[dim + 1], line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

LabeledMeasure read_measure_csv(const std::string& path, std::optional<int> num_classes) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open input file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return load_measure(parse_measure_csv(buf.str()), num_classes);
}

std::string measure_to_csv(const LabeledMeasure& m) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int k = 0; k < m.dim(); ++k) out << "x" << k << ",";
  out << "label,weight\n";
  for (const auto& a : m.atoms()) {
    for (int k = 0; k < m.dim(); ++k) out << a.x[k] << ",";
    out << a.label << "," << a.weight << "\n";
  }
  return out.str();
}

}  // namespace advmot
