#include "spsc/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "spsc/errors.hpp"

namespace spsc::io {

namespace {

constexpr std::array<char, 4> kMagic{'P', 'T', 'A', 'G'};
constexpr std::size_t kRecordBytes = 12;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars does not accept a leading '+'.
    if (first != last && *first == '+') ++first;
    if (std::string_view(first, static_cast<std::size_t>(last - first)) == "inf") {
      out = std::numeric_limits<T>::infinity();
      return true;
    }
  }
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

template <class T>
T require_number(const std::string& text, const std::string& what, std::size_t line) {
  T v{};
  if (!parse_number(text, v)) {
    throw FormatError(what + ": bad number '" + text + "' on line " + std::to_string(line));
  }
  return v;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Metadata comments of the form "# key=value".
void read_meta(const std::string& line, const std::string& key, std::string& value) {
  const std::string body = trim(std::string_view(line).substr(1));
  if (body.rfind(key + "=", 0) == 0) value = trim(body.substr(key.size() + 1));
}

template <class T>
void put_le(std::ostream& os, T v) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(v);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>(u & 0xFF);
    u = static_cast<U>(u >> 8);
  }
  os.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(const unsigned char* p) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) u = static_cast<U>((u << 8) | p[i]);
  return static_cast<T>(u);
}

TagStream finish_tags(std::vector<Tag> tags, std::optional<TimePs> duration_ps, const char* what) {
  for (std::size_t i = 1; i < tags.size(); ++i) {
    if (tags[i].time_ps < tags[i - 1].time_ps) {
      throw FormatError(std::string(what) + ": tags are not time-ordered at record " + std::to_string(i));
    }
  }
  const TimePs duration = duration_ps.value_or(tags.empty() ? 0 : tags.back().time_ps + 1);
  if (duration < 0) throw FormatError(std::string(what) + ": negative duration");
  return TagStream(std::move(tags), duration);
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

void write_tags_csv(std::ostream& os, const TagStream& s) {
  os << "# duration_ps=" << s.duration_ps() << '\n';
  os << "channel,time_ps\n";
  for (const Tag& t : s.tags()) os << t.channel << ',' << t.time_ps << '\n';
}

TagStream read_tags_csv(std::istream& is, std::optional<TimePs> duration_ps) {
  std::string line;
  std::size_t lineno = 0;
  std::string duration_text;
  bool header = false;
  std::vector<Tag> tags;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (!header) read_meta(t, "duration_ps", duration_text);
      continue;
    }
    if (!header) {
      if (t != "channel,time_ps") throw FormatError("tag CSV: expected header 'channel,time_ps'");
      header = true;
      continue;
    }
    const auto fields = split(t, ',');
    if (fields.size() != 2) throw FormatError("tag CSV: expected 2 fields on line " + std::to_string(lineno));
    const auto channel = require_number<Channel>(fields[0], "tag CSV", lineno);
    const auto time = require_number<TimePs>(fields[1], "tag CSV", lineno);
    tags.push_back({time, channel});
  }
  if (!header) throw FormatError("tag CSV: missing header");
  if (!duration_ps && !duration_text.empty()) duration_ps = require_number<TimePs>(duration_text, "tag CSV", 1);
  return finish_tags(std::move(tags), duration_ps, "tag CSV");
}

void write_tags_binary(std::ostream& os, const TagStream& s) {
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(os, kTagBinaryVersion);
  for (const Tag& t : s.tags()) {
    put_le<std::int64_t>(os, t.time_ps);
    put_le<std::uint16_t>(os, t.channel);
    put_le<std::uint16_t>(os, 0);
  }
}

TagStream read_tags_binary(std::istream& is, std::optional<TimePs> duration_ps) {
  const std::string data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (data.size() < 6 || !std::equal(kMagic.begin(), kMagic.end(), data.begin())) {
    throw FormatError("tag binary: missing PTAG magic");
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const auto version = get_le<std::uint16_t>(bytes + 4);
  if (version != kTagBinaryVersion) throw FormatError("tag binary: unsupported version " + std::to_string(version));
  const std::size_t payload = data.size() - 6;
  if (payload % kRecordBytes != 0) throw FormatError("tag binary: truncated record");
  std::vector<Tag> tags(payload / kRecordBytes);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const unsigned char* rec = bytes + 6 + i * kRecordBytes;
    if (get_le<std::uint16_t>(rec + 10) != 0) {
      throw FormatError("tag binary: nonzero padding in record " + std::to_string(i));
    }
    tags[i] = {get_le<std::int64_t>(rec), get_le<std::uint16_t>(rec + 8)};
  }
  return finish_tags(std::move(tags), duration_ps, "tag binary");
}

TagFormat tag_format_for(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? TagFormat::kCsv : TagFormat::kBinary;
}

void write_tags(const std::filesystem::path& path, const TagStream& s) {
  if (tag_format_for(path) == TagFormat::kCsv) {
    auto out = open_out(path);
    write_tags_csv(out, s);
  } else {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    write_tags_binary(out, s);
  }
}

TagStream read_tags(const std::filesystem::path& path, std::optional<TimePs> duration_ps) {
  if (tag_format_for(path) == TagFormat::kCsv) {
    auto in = open_in(path);
    return read_tags_csv(in, duration_ps);
  }
  auto in = open_in(path, std::ios::in | std::ios::binary);
  return read_tags_binary(in, duration_ps);
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "# norm=" << format_double(h.norm) << '\n';
  os << "# total_pairs=" << h.total_pairs << '\n';
  os << "bin_start_ps,bin_end_ps,counts,normalized\n";
  for (std::size_t k = 0; k < h.bins(); ++k) {
    const double g = h.normalized() ? h.g2(k) : 0.0;
    os << h.bin_start_ps(k) << ',' << h.bin_end_ps(k) << ',' << h.counts[k] << ',' << format_double(g) << '\n';
  }
}

Histogram read_histogram_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  std::string norm_text;
  std::string pairs_text;
  bool header = false;
  std::vector<TimePs> starts;
  std::vector<TimePs> ends;
  std::vector<std::uint64_t> counts;
  std::vector<double> normalized;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      read_meta(t, "norm", norm_text);
      read_meta(t, "total_pairs", pairs_text);
      continue;
    }
    if (!header) {
      if (t != "bin_start_ps,bin_end_ps,counts,normalized") {
        throw FormatError("histogram CSV: expected header 'bin_start_ps,bin_end_ps,counts,normalized'");
      }
      header = true;
      continue;
    }
    const auto f = split(t, ',');
    if (f.size() != 4) throw FormatError("histogram CSV: expected 4 fields on line " + std::to_string(lineno));
    starts.push_back(require_number<TimePs>(f[0], "histogram CSV", lineno));
    ends.push_back(require_number<TimePs>(f[1], "histogram CSV", lineno));
    counts.push_back(require_number<std::uint64_t>(f[2], "histogram CSV", lineno));
    normalized.push_back(require_number<double>(f[3], "histogram CSV", lineno));
  }
  if (!header) throw FormatError("histogram CSV: missing header");
  if (starts.empty()) throw FormatError("histogram CSV: no bins");
  const TimePs width = ends[0] - starts[0];
  for (std::size_t k = 0; k < starts.size(); ++k) {
    if (ends[k] - starts[k] != width || (k > 0 && starts[k] != ends[k - 1])) {
      throw FormatError("histogram CSV: bins are not contiguous and equal-width");
    }
  }
  if (starts.front() != -ends.back()) throw FormatError("histogram CSV: bins do not span [-tau_max, tau_max)");
  Histogram h;
  try {
    h = Histogram::zeros(width, ends.back());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("histogram CSV: ") + e.what());
  }
  h.counts = std::move(counts);
  if (!pairs_text.empty()) {
    h.total_pairs = require_number<std::uint64_t>(pairs_text, "histogram CSV", 0);
  } else {
    for (auto c : h.counts) h.total_pairs += c;
  }
  if (!norm_text.empty()) {
    h.norm = require_number<double>(norm_text, "histogram CSV", 0);
  } else {
    for (std::size_t k = 0; k < h.bins(); ++k) {
      if (h.counts[k] > 0 && normalized[k] > 0.0) {
        h.norm = static_cast<double>(h.counts[k]) / normalized[k];
        break;
      }
    }
  }
  return h;
}

void write_histogram(const std::filesystem::path& path, const Histogram& h) {
  auto out = open_out(path);
  write_histogram_csv(out, h);
}

Histogram read_histogram(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_histogram_csv(in);
}

namespace {

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::kRelativeDecrease: return "relative_decrease";
    case Termination::kGradient: return "gradient";
    case Termination::kStalled: return "stalled";
    case Termination::kMaxIterations: return "max_iterations";
  }
  return "max_iterations";
}

Termination termination_from(const std::string& s) {
  if (s == "relative_decrease") return Termination::kRelativeDecrease;
  if (s == "gradient") return Termination::kGradient;
  if (s == "stalled") return Termination::kStalled;
  if (s == "max_iterations") return Termination::kMaxIterations;
  throw FormatError("fit result: unknown termination '" + s + "'");
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

std::vector<double> parse_list(const std::string& s, std::size_t lineno) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(require_number<double>(tok, "fit result", lineno));
  return out;
}

}  // namespace

void write_fit_result(std::ostream& os, const FitResult& r) {
  os << "model = " << r.model << '\n';
  os << "converged = " << (r.converged ? "true" : "false") << '\n';
  os << "termination = " << termination_name(r.termination) << '\n';
  os << "iterations = " << r.iterations << '\n';
  os << "chi2 = " << format_double(r.chi2) << '\n';
  os << "chi2_reduced = " << format_double(r.chi2_reduced) << '\n';
  for (std::size_t j = 0; j < r.params.size(); ++j) {
    os << "param " << r.names[j] << " = " << format_double(r.params[j]) << " +/- " << format_double(r.sigma[j]) << '\n';
  }
  std::vector<double> cov(static_cast<std::size_t>(r.covariance.size()));
  for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.covariance.cols(); ++j) {
      cov[static_cast<std::size_t>(i * r.covariance.cols() + j)] = r.covariance(i, j);
    }
  }
  os << "covariance = " << join(cov) << '\n';
  os << "objective_history = " << join(r.objective_history) << '\n';
}

FitResult read_fit_result(std::istream& is) {
  FitResult r;
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> cov;
  bool have_model = false;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError("fit result: expected 'key = value' on line " + std::to_string(lineno));
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key == "model") {
      r.model = value;
      have_model = true;
    } else if (key == "converged") {
      if (value != "true" && value != "false") throw FormatError("fit result: converged must be true/false");
      r.converged = value == "true";
    } else if (key == "termination") {
      r.termination = termination_from(value);
    } else if (key == "iterations") {
      r.iterations = require_number<int>(value, "fit result", lineno);
    } else if (key == "chi2") {
      r.chi2 = require_number<double>(value, "fit result", lineno);
    } else if (key == "chi2_reduced") {
      r.chi2_reduced = require_number<double>(value, "fit result", lineno);
    } else if (key.rfind("param ", 0) == 0) {
      const auto pm = value.find("+/-");
      if (pm == std::string::npos) throw FormatError("fit result: parameter line lacks '+/-' on line " + std::to_string(lineno));
      r.names.push_back(trim(std::string_view(key).substr(6)));
      r.params.push_back(require_number<double>(trim(std::string_view(value).substr(0, pm)), "fit result", lineno));
      r.sigma.push_back(require_number<double>(trim(std::string_view(value).substr(pm + 3)), "fit result", lineno));
    } else if (key == "covariance") {
      cov = parse_list(value, lineno);
    } else if (key == "objective_history") {
      r.objective_history = parse_list(value, lineno);
    } else {
      throw FormatError("fit result: unknown key '" + key + "'");
    }
  }
  if (!have_model) throw FormatError("fit result: missing model");
  const auto k = static_cast<Eigen::Index>(r.params.size());
  if (!cov.empty() && cov.size() != r.params.size() * r.params.size()) {
    throw FormatError("fit result: covariance size does not match parameter count");
  }
  r.covariance = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < cov.size(); ++i) {
    r.covariance(static_cast<Eigen::Index>(i) / k, static_cast<Eigen::Index>(i) % k) = cov[i];
  }
  return r;
}

void write_fit_result(const std::filesystem::path& path, const FitResult& r) {
  auto out = open_out(path);
  write_fit_result(out, r);
}

FitResult read_fit_result(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_fit_result(in);
}

void write_field_map(std::ostream& os, const FieldMap& f) {
  os << f.nx << ' ' << f.ny << ' ' << format_double(f.dx_um) << ' ' << format_double(f.dy_um) << '\n';
  for (const auto& a : f.amplitude) os << format_double(a.real()) << ' ' << format_double(a.imag()) << '\n';
}

FieldMap read_field_map(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  FieldMap f;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream in(line);
    std::vector<std::string> tok;
    std::string s;
    while (in >> s) tok.push_back(s);
    if (tok.empty()) continue;
    if (!have_header) {
      if (tok.size() != 4) throw FormatError("field map: first line must be 'nx ny dx_um dy_um'");
      f.nx = require_number<std::size_t>(tok[0], "field map", lineno);
      f.ny = require_number<std::size_t>(tok[1], "field map", lineno);
      f.dx_um = require_number<double>(tok[2], "field map", lineno);
      f.dy_um = require_number<double>(tok[3], "field map", lineno);
      if (f.nx < 2 || f.ny < 2 || f.nx * f.ny > (std::size_t{1} << 30)) throw FormatError("field map: bad grid size");
      f.amplitude.reserve(f.nx * f.ny);
      have_header = true;
      continue;
    }
    if (tok.size() != 2) throw FormatError("field map: expected 're im' on line " + std::to_string(lineno));
    f.amplitude.emplace_back(require_number<double>(tok[0], "field map", lineno),
                             require_number<double>(tok[1], "field map", lineno));
  }
  if (!have_header) throw FormatError("field map: empty file");
  if (f.amplitude.size() != f.nx * f.ny) {
    throw FormatError("field map: expected " + std::to_string(f.nx * f.ny) + " samples, found " +
                      std::to_string(f.amplitude.size()));
  }
  try {
    f.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return f;
}

void write_field_map(const std::filesystem::path& path, const FieldMap& f) {
  auto out = open_out(path);
  write_field_map(out, f);
}

FieldMap read_field_map(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_field_map(in);
}

std::vector<DataPoint> read_points_csv(std::istream& is) {
  std::vector<DataPoint> out;
  std::string line;
  std::size_t lineno = 0;
  bool first_row = true;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split(t, ',');
    double probe = 0.0;
    if (first_row && !parse_number(f[0], probe)) {
      first_row = false;
      continue;
    }
    first_row = false;
    if (f.size() < 2 || f.size() > 3) throw FormatError("points CSV: expected 2 or 3 fields on line " + std::to_string(lineno));
    DataPoint p;
    p.x = require_number<double>(f[0], "points CSV", lineno);
    p.y = require_number<double>(f[1], "points CSV", lineno);
    if (f.size() == 3) p.sigma = require_number<double>(f[2], "points CSV", lineno);
    out.push_back(p);
  }
  return out;
}

std::vector<DataPoint> read_points(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_points_csv(in);
}

}  // namespace spsc::io
