#include "crn/observations.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "crn/kinetics.hpp"
#include "crn/mechanism.hpp"

namespace crn {

std::optional<std::size_t> ObservationSet::column(std::string_view name) const {
  for (std::size_t j = 0; j < species.size(); ++j)
    if (species[j] == name) return j;
  return std::nullopt;
}

std::size_t ObservationSet::observation_count() const {
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j) n += !is_missing(values(i, j));
  return n;
}

void ObservationSet::validate() const {
  if (static_cast<std::size_t>(values.rows()) != times.size() ||
      static_cast<std::size_t>(values.cols()) != species.size())
    throw DataError("value matrix shape does not match times x species");
  if (species.empty()) throw DataError("no observed species");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0) throw DataError("times must be finite and non-negative");
    if (i > 0 && times[i] < times[i - 1]) throw DataError("times must be non-decreasing");
  }
  for (std::size_t j = 0; j < species.size(); ++j) {
    if (!SpeciesSet::is_valid_name(species[j])) throw DataError("invalid species name '" + species[j] + "'");
    for (std::size_t k = 0; k < j; ++k)
      if (species[k] == species[j]) throw DataError("duplicate species column '" + species[j] + "'");
    const auto col = values.col(static_cast<Eigen::Index>(j));
    bool any = false;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (is_missing(col[i])) continue;
      any = true;
      if (!std::isfinite(col[i]) || col[i] < 0) throw DataError("values must be finite and non-negative");
    }
    if (!any) throw DataError("species '" + species[j] + "' has no observations");
  }
  for (const auto& [name, v] : init)
    if (!std::isfinite(v) || v < 0) throw DataError("initial concentration of " + name + " must be non-negative");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

ObservationSet parse_csv(std::string_view text, const std::string& source) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  auto fail = [&](std::size_t line, const std::string& msg) -> DataError {
    return DataError(source + ":" + std::to_string(line) + ": " + msg);
  };

  std::vector<std::string> header;
  struct Row {
    double t;
    std::vector<double> v;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (header.empty()) {
      if (fields[0] != "t") throw fail(line_no, "first header column must be 't'");
      if (fields.size() < 2) throw fail(line_no, "header names no species");
      for (std::size_t j = 1; j < fields.size(); ++j) {
        std::string name(fields[j]);
        if (!SpeciesSet::is_valid_name(name)) throw fail(line_no, "invalid species name '" + name + "'");
        if (std::find(header.begin(), header.end(), name) != header.end())
          throw fail(line_no, "duplicate species column '" + name + "'");
        header.push_back(std::move(name));
      }
      continue;
    }
    if (fields.size() != header.size() + 1)
      throw fail(line_no, "expected " + std::to_string(header.size() + 1) + " fields, found " +
                              std::to_string(fields.size()));
    auto t = parse_number(fields[0]);
    if (!t || *t < 0) throw fail(line_no, "time must be a finite non-negative number");
    Row row{*t, std::vector<double>(header.size(), kMissing), line_no};
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (fields[j + 1].empty()) continue;
      auto v = parse_number(fields[j + 1]);
      if (!v) throw fail(line_no, "malformed value '" + std::string(fields[j + 1]) + "'");
      if (*v < 0) throw fail(line_no, "negative concentration");
      row.v[j] = *v;
    }
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw DataError(source + ": empty file");
  if (rows.empty()) throw DataError(source + ": no data rows");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
  std::vector<Row> merged;
  for (auto& r : rows) {
    if (!merged.empty() && merged.back().t == r.t) {
      auto& m = merged.back();
      for (std::size_t j = 0; j < header.size(); ++j) {
        if (is_missing(r.v[j])) continue;
        if (!is_missing(m.v[j]) && m.v[j] != r.v[j])
          throw fail(r.line, "duplicate time " + format_double(r.t) + " with conflicting values");
        m.v[j] = r.v[j];
      }
    } else {
      merged.push_back(std::move(r));
    }
  }
  if (merged.size() < 2) throw DataError(source + ": at least two time points are required");

  // Columns without any value are treated as unobserved.
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (std::any_of(merged.begin(), merged.end(), [j](const Row& r) { return !is_missing(r.v[j]); }))
      keep.push_back(j);
  if (keep.empty()) throw DataError(source + ": no observed values");

  ObservationSet obs;
  obs.source = source;
  for (auto j : keep) obs.species.push_back(header[j]);
  obs.values.resize(static_cast<Eigen::Index>(merged.size()), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < merged.size(); ++i) {
    obs.times.push_back(merged[i].t);
    for (std::size_t k = 0; k < keep.size(); ++k)
      obs.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = merged[i].v[keep[k]];
  }
  obs.validate();
  return obs;
}

ObservationSet load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.string());
}

std::string to_csv(const ObservationSet& data) {
  std::string out = "t";
  for (const auto& s : data.species) out += "," + s;
  out += "\n";
  for (std::size_t i = 0; i < data.times.size(); ++i) {
    out += format_double(data.times[i]);
    for (Eigen::Index j = 0; j < data.values.cols(); ++j) {
      out += ",";
      const double v = data.values(static_cast<Eigen::Index>(i), j);
      if (!is_missing(v)) out += format_double(v);
    }
    out += "\n";
  }
  return out;
}

void save_csv(const ObservationSet& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv(data);
  if (!out) throw DataError("write failed: " + path.string());
}

// ------------------------------------------------------------------ fixtures

namespace {

Fixture salicylic_fixture() {
  Fixture f;
  f.name = "salicylic";
  f.description =
      "Salicylic acid in gastric (X) and intestine (Z) fluid, hours and M/l. x is measured from t=1 and z "
      "from t=0; x(0) is fixed by a one-off fit with the reference coefficients held constant.";
  f.mechanism = "X -> Y; Y -> Z";
  f.rates = {{"k1", 0.0786482}, {"k2", 0.181337}};
  const double x[] = {0.01579, 0.01429, 0.01327, 0.01230, 0.01148, 0.01066, 0.00988, 0.00912, 0.00851, 0.00791};
  const double z[] = {0, 0.0003, 0.000614, 0.000917, 0.00143, 0.00201, 0.00269, 0.00338, 0.00402, 0.00473};
  ObservationSet& d = f.data;
  d.species = {"X", "Z"};
  d.values.resize(11, 2);
  for (int i = 0; i <= 10; ++i) {
    d.times.push_back(i);
    d.values(i, 0) = i == 0 ? kMissing : x[i - 1];
    d.values(i, 1) = i == 10 ? kMissing : z[i];
  }
  d.init = {{"X", kSalicylicInitialX}, {"Y", 0.0}, {"Z", 0.0}};
  d.source = "fixture:salicylic";
  return f;
}

Fixture sim_fixture() {
  Fixture f;
  f.name = "sim-m2r2";
  f.description =
      "Simulated X <=> Y, 2 X <=> X + Y with k1 = km1 = 0.1, k2 = km2 = 1, c0 = (2, 3), t = 0..10 step 0.1, "
      "2% multiplicative noise.";
  f.mechanism = "X <=> Y; 2 X <=> X + Y";
  f.rates = {{"k1", 0.1}, {"km1", 0.1}, {"k2", 1.0}, {"km2", 1.0}};
  const Mechanism m = parse_mechanism(f.mechanism);
  const KineticSystem sys(m, RateAssignment{{0.1, 1.0}, {0.1, 1.0}});
  const auto grid = uniform_grid(10.0, 0.1);
  Eigen::VectorXd c0(2);
  c0 << 2.0, 3.0;
  const Trajectory traj = integrate(sys, c0, 10.0, grid);
  f.data = sample_with_noise(traj, m.species(), NoiseSpec{0.02, kSimFixtureSeed});
  f.data.source = "fixture:sim-m2r2";
  return f;
}

}  // namespace

std::vector<std::string> fixture_names() { return {"salicylic", "sim-m2r2"}; }

Fixture load_fixture(std::string_view name) {
  if (name == "salicylic") return salicylic_fixture();
  if (name == "sim-m2r2") return sim_fixture();
  throw DataError("unknown fixture '" + std::string(name) + "'");
}

ObservationSet load_data(std::string_view ref) {
  constexpr std::string_view prefix = "fixture:";
  if (ref.substr(0, prefix.size()) == prefix) return load_fixture(ref.substr(prefix.size())).data;
  return load_csv(std::filesystem::path(std::string(ref)));
}

}  // namespace crn
