#include "xlat/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "xlat/errors.hpp"

namespace xlat {

using nlohmann::json;

namespace {

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

std::string sci(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::scientific, 12);
  return std::string(buf.data(), res.ptr);
}

struct OptionLine {
  double unit = 1e9;
  TouchstoneFormat format = TouchstoneFormat::MA;
  double r = 50.0;
};

OptionLine parse_option_line(const std::string& line) {
  OptionLine opt;
  const auto tokens = split_ws(std::string_view(line).substr(1));
  bool seen_unit = false, seen_param = false, seen_format = false, seen_r = false;
  auto dup = [&](bool& flag, const std::string& tok) {
    if (flag) fail(ErrorCode::MalformedOptionLine, "repeated field '" + tok + "' in option line: " + line);
    flag = true;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string t = upper(tokens[i]);
    if (t == "HZ" || t == "KHZ" || t == "MHZ" || t == "GHZ") {
      dup(seen_unit, t);
      opt.unit = t == "HZ" ? 1.0 : t == "KHZ" ? 1e3 : t == "MHZ" ? 1e6 : 1e9;
    } else if (t == "S") {
      dup(seen_param, t);
    } else if (t == "Y" || t == "Z" || t == "H" || t == "G") {
      fail(ErrorCode::UnsupportedParameter,
           "parameter type '" + t + "' is not supported; only S-parameter files can be read");
    } else if (t == "RI" || t == "MA" || t == "DB") {
      dup(seen_format, t);
      opt.format = parse_touchstone_format(t);
    } else if (t == "R") {
      dup(seen_r, t);
      if (i + 1 >= tokens.size() || !parse_double(tokens[i + 1], opt.r) || opt.r <= 0.0) {
        fail(ErrorCode::MalformedOptionLine, "R must be followed by a positive resistance: " + line);
      }
      ++i;
    } else {
      fail(ErrorCode::MalformedOptionLine, "unrecognized token '" + tokens[i] + "' in option line: " + line);
    }
  }
  return opt;
}

cplx decode_pair(double a, double b, TouchstoneFormat f) {
  switch (f) {
    case TouchstoneFormat::RI:
      return {a, b};
    case TouchstoneFormat::MA:
      return std::polar(a, b * kPi / 180.0);
    case TouchstoneFormat::DB:
      return std::polar(std::pow(10.0, a / 20.0), b * kPi / 180.0);
  }
  return {};
}

std::string encode_pair(cplx v, TouchstoneFormat f) {
  switch (f) {
    case TouchstoneFormat::RI:
      return sci(v.real()) + " " + sci(v.imag());
    case TouchstoneFormat::MA:
      return sci(std::abs(v)) + " " + sci(std::arg(v) * 180.0 / kPi);
    case TouchstoneFormat::DB: {
      const double mag = std::abs(v);
      const double db = mag > 0.0 ? 20.0 * std::log10(mag) : -kInfiniteLossDb;
      return sci(db) + " " + sci(std::arg(v) * 180.0 / kPi);
    }
  }
  return {};
}

const char* format_name(TouchstoneFormat f) {
  switch (f) {
    case TouchstoneFormat::RI: return "RI";
    case TouchstoneFormat::MA: return "MA";
    case TouchstoneFormat::DB: return "DB";
  }
  return "MA";
}

std::string format_lines(const std::vector<double>& f, const std::vector<std::array<cplx, 4>>& rows, int ports,
                         double r, TouchstoneFormat format, const std::vector<std::string>& comments) {
  if (f.empty()) fail(ErrorCode::InvalidArgument, "refusing to write an empty sweep");
  std::string out = "! ";
  out += kToolVersion;
  out += "\n";
  for (const auto& c : comments) out += "! " + c + "\n";
  out += "# Hz S ";
  out += format_name(format);
  out += " R " + format_number(r) + "\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    out += sci(f[i]);
    for (int k = 0; k < (ports == 1 ? 1 : 4); ++k) out += " " + encode_pair(rows[i][k], format);
    out += "\n";
  }
  return out;
}

// ---- JSON helpers --------------------------------------------------------

void check_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::SchemaError, where + " must be a JSON object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  check_object(j, where);
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      fail(ErrorCode::SchemaError, "unknown key '" + key + "' in " + where);
    }
  }
}

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(ErrorCode::SchemaError, where + " is missing '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) fail(ErrorCode::SchemaError, where + "." + key + " must be a number");
  return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

std::string text(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) fail(ErrorCode::SchemaError, where + "." + key + " must be a string");
  return j.at(key).get<std::string>();
}

void check_schema(const json& j, const std::string& where) {
  if (!j.contains("schema")) fail(ErrorCode::SchemaError, where + " has no \"schema\" version field");
  const json& v = j.at("schema");
  if (!v.is_number_integer()) fail(ErrorCode::SchemaError, where + ": \"schema\" must be an integer");
  const int version = v.get<int>();
  if (version > kSchemaVersion) {
    fail(ErrorCode::SchemaError, where + " uses schema " + std::to_string(version) +
                                     ", newer than the supported version " + std::to_string(kSchemaVersion));
  }
  if (version < 1) fail(ErrorCode::SchemaError, where + ": invalid schema version");
}

json cplx_json(cplx v) { return json{{"re", v.real()}, {"im", v.imag()}}; }

cplx parse_cplx(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  check_keys(j, {"re", "im"}, where);
  return {number(j, "re", where), number_or(j, "im", 0.0, where)};
}

std::vector<Stopband> parse_stopbands(const json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::SchemaError, where + " must be a list of [lo, hi] pairs");
  std::vector<Stopband> out;
  for (const auto& band : j) {
    if (!band.is_array() || band.size() != 2 || !band[0].is_number() || !band[1].is_number()) {
      fail(ErrorCode::SchemaError, where + " entries must be [lo, hi] numbers");
    }
    const Stopband sb{band[0].get<double>(), band[1].get<double>()};
    if (!(sb.lo_hz > 0.0 && sb.lo_hz < sb.hi_hz)) fail(ErrorCode::SchemaError, where + " entries need 0 < lo < hi");
    out.push_back(sb);
  }
  return out;
}

json stopbands_json(const std::vector<Stopband>& s) {
  json out = json::array();
  for (const auto& b : s) out.push_back({b.lo_hz, b.hi_hz});
  return out;
}

MotionalBranch parse_branch(const json& j, const std::string& where) {
  check_keys(j, {"mode", "rm", "q", "lm", "fs_hz", "cm"}, where);
  const ModeLabel mode = j.contains("mode") ? ModeLabel::parse(text(j, "mode", where)) : ModeLabel{};
  const double cm = number(j, "cm", where);
  if (j.contains("lm") == j.contains("fs_hz")) fail(ErrorCode::SchemaError, where + " needs exactly one of lm, fs_hz");
  if (j.contains("rm") == j.contains("q")) fail(ErrorCode::SchemaError, where + " needs exactly one of rm, q");
  MotionalBranch b;
  b.mode = mode;
  b.cm = cm;
  if (j.contains("lm")) {
    b.lm = number(j, "lm", where);
  } else {
    const double w = 2.0 * kPi * number(j, "fs_hz", where);
    b.lm = cm > 0.0 ? 1.0 / (w * w * cm) : 0.0;
  }
  if (j.contains("rm")) {
    b.rm = number(j, "rm", where);
  } else {
    const double q = number(j, "q", where);
    if (!(q > 0.0) || !(cm > 0.0)) fail(ErrorCode::SchemaError, where + ": q form needs q > 0 and cm > 0");
    b.rm = std::sqrt(b.lm / cm) / q;
  }
  b.validate();
  return b;
}

json branch_json(const MotionalBranch& b) {
  return json{{"mode", b.mode.str()}, {"rm", b.rm}, {"lm", b.lm}, {"cm", b.cm}};
}

ResonatorGeometry parse_geometry(const json& j, const std::string& where) {
  check_keys(j, {"n_e", "l_e", "w_e", "w_g", "t1", "t2"}, where);
  ResonatorGeometry g;
  if (!j.contains("n_e") || !j.at("n_e").is_number_integer()) fail(ErrorCode::SchemaError, where + ".n_e must be an integer");
  g.n_e = j.at("n_e").get<int>();
  g.l_e = number(j, "l_e", where);
  g.w_e = number(j, "w_e", where);
  g.w_g = number(j, "w_g", where);
  g.t1 = number(j, "t1", where);
  g.t2 = number(j, "t2", where);
  g.validate();
  return g;
}

json geometry_json(const ResonatorGeometry& g) {
  return json{{"n_e", g.n_e}, {"l_e", g.l_e}, {"w_e", g.w_e}, {"w_g", g.w_g}, {"t1", g.t1}, {"t2", g.t2}};
}

std::string csv_number(double v) { return std::isfinite(v) ? format_number(v) : std::string(); }

}  // namespace

// ---- Touchstone ----------------------------------------------------------

TouchstoneFormat parse_touchstone_format(const std::string& s) {
  const std::string t = upper(s);
  if (t == "RI") return TouchstoneFormat::RI;
  if (t == "MA") return TouchstoneFormat::MA;
  if (t == "DB") return TouchstoneFormat::DB;
  fail(ErrorCode::InvalidArgument, "unknown Touchstone format '" + s + "' (expected RI, MA or DB)");
}

int touchstone_ports(const std::filesystem::path& path) {
  const std::string ext = upper(path.extension().string());
  if (ext == ".S1P") return 1;
  if (ext == ".S2P") return 2;
  fail(ErrorCode::InvalidArgument, "expected a .s1p or .s2p file, got '" + path.string() + "'");
}

std::filesystem::path sidecar_path(const std::filesystem::path& touchstone) {
  return std::filesystem::path(touchstone.string() + ".refs.json");
}

TouchstoneData parse_touchstone(std::string_view content, int ports, std::string source) {
  if (ports != 1 && ports != 2) fail(ErrorCode::InvalidArgument, "only 1- and 2-port Touchstone data is supported");
  TouchstoneData out;
  out.ports = ports;
  out.source = std::move(source);
  std::optional<OptionLine> opt;
  std::vector<double> values;

  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto bang = line.find('!');
    if (bang != std::string::npos) {
      out.comments.push_back(trim(std::string_view(line).substr(bang + 1)));
      line.resize(bang);
    }
    const std::string body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      if (opt) continue;  // only the first option line counts
      opt = parse_option_line(body);
      continue;
    }
    if (body.front() == '[') fail(ErrorCode::InvalidArgument, "Touchstone v2 keywords are not supported");
    for (const auto& tok : split_ws(body)) {
      double v;
      if (!parse_double(tok, v)) fail(ErrorCode::InvalidArgument, "malformed number '" + tok + "' in data");
      values.push_back(v);
    }
  }
  if (!opt) opt = OptionLine{};
  const std::size_t per_record = ports == 1 ? 3 : 9;
  if (values.empty()) fail(ErrorCode::InvalidArgument, "Touchstone data holds no frequency points");
  if (values.size() % per_record != 0) {
    fail(ErrorCode::InvalidArgument, "data does not split into " + std::to_string(per_record) + "-value records");
  }
  for (std::size_t r = 0; r < values.size() / per_record; ++r) {
    const double* v = values.data() + r * per_record;
    const double f = v[0] * opt->unit;
    if (!(f >= 0.0)) fail(ErrorCode::InvalidArgument, "negative frequency in data");
    if (!out.frequencies_hz.empty() && !(f > out.frequencies_hz.back())) {
      fail(ErrorCode::NonMonotoneFrequency, "frequency " + format_number(f) + " Hz does not increase");
    }
    out.frequencies_hz.push_back(f);
    Matrix2c m = Matrix2c::Zero();
    if (ports == 1) {
      m(0, 0) = decode_pair(v[1], v[2], opt->format);
    } else {
      m(0, 0) = decode_pair(v[1], v[2], opt->format);
      m(1, 0) = decode_pair(v[3], v[4], opt->format);
      m(0, 1) = decode_pair(v[5], v[6], opt->format);
      m(1, 1) = decode_pair(v[7], v[8], opt->format);
    }
    out.s.push_back(m);
  }
  out.refs = {cplx{opt->r}, cplx{opt->r}};
  return out;
}

TouchstoneData read_touchstone(const std::filesystem::path& path) {
  const int ports = touchstone_ports(path);
  TouchstoneData d = parse_touchstone(read_file(path), ports, path.string());
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    json j;
    try {
      j = json::parse(read_file(side));
    } catch (const json::exception& e) {
      fail(ErrorCode::SchemaError, side.string() + ": " + e.what());
    }
    check_keys(j, {"schema", "refs", "note"}, "sidecar");
    check_schema(j, "sidecar");
    if (!j.contains("refs") || !j.at("refs").is_array() || j.at("refs").size() != 2) {
      fail(ErrorCode::SchemaError, "sidecar refs must list two impedances");
    }
    d.refs = {parse_cplx(j.at("refs")[0], "sidecar.refs"), parse_cplx(j.at("refs")[1], "sidecar.refs")};
  }
  return d;
}

SweepResponse TouchstoneData::sweep() const {
  if (ports != 2) fail(ErrorCode::InvalidArgument, source + ": a two-port (.s2p) file is required");
  return SweepResponse(FrequencyGrid(frequencies_hz, Spacing::Linear), ParamKind::S, s, refs);
}

MeasuredOnePort TouchstoneData::one_port() const {
  if (ports != 1) fail(ErrorCode::InvalidArgument, source + ": a one-port (.s1p) file is required");
  if (!refs_are_real(refs)) fail(ErrorCode::InvalidArgument, "one-port data needs a real reference");
  std::vector<cplx> s11;
  for (const auto& m : s) s11.push_back(m(0, 0));
  return one_port_from_s11(FrequencyGrid(frequencies_hz, Spacing::Linear), s11, refs[0].real(), source);
}

std::string format_touchstone(const SweepResponse& r, TouchstoneFormat format,
                              const std::vector<std::string>& comments, bool allow_complex_refs) {
  if (r.kind() != ParamKind::S) fail(ErrorCode::KindMismatch, "Touchstone output needs S-parameters");
  const bool uniform_real = refs_are_real(r.refs()) && r.refs()[0] == r.refs()[1];
  if (!uniform_real && !allow_complex_refs) {
    fail(ErrorCode::ComplexReferenceUnsupported,
         "Touchstone v1 holds one real reference resistance; write with the sidecar option to keep "
         "complex or unequal port references");
  }
  std::vector<double> f(r.grid().points().begin(), r.grid().points().end());
  std::vector<std::array<cplx, 4>> rows;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto& m = r.matrix(i);
    rows.push_back({m(0, 0), m(1, 0), m(0, 1), m(1, 1)});
  }
  std::vector<std::string> all = comments;
  double r_line = r.refs()[0].real();
  if (!uniform_real) {
    all.push_back("power-wave S renormalized to the complex references listed in the .refs.json sidecar");
    r_line = 50.0;
  }
  return format_lines(f, rows, 2, r_line, format, all);
}

void write_touchstone(const SweepResponse& r, const std::filesystem::path& path, TouchstoneFormat format,
                      bool sidecar, const std::vector<std::string>& comments) {
  const bool uniform_real = refs_are_real(r.refs()) && r.refs()[0] == r.refs()[1];
  const std::string body = format_touchstone(r, format, comments, sidecar);
  if (sidecar && !uniform_real) {
    json j{{"schema", kSchemaVersion},
           {"refs", json::array({cplx_json(r.refs()[0]), cplx_json(r.refs()[1])})},
           {"note", "S data in the companion file are power-wave parameters against these references"}};
    write_file_atomic(sidecar_path(path), j.dump(2) + "\n");
  } else if (std::filesystem::exists(sidecar_path(path))) {
    std::filesystem::remove(sidecar_path(path));
  }
  write_file_atomic(path, body);
}

void write_touchstone(const FrequencyGrid& grid, const std::vector<cplx>& s11, double z0,
                      const std::filesystem::path& path, TouchstoneFormat format,
                      const std::vector<std::string>& comments) {
  if (s11.size() != grid.size()) fail(ErrorCode::InvalidArgument, "s11 and grid sizes differ");
  if (!(z0 > 0.0)) fail(ErrorCode::NonPositiveReference, "z0 must be > 0");
  std::vector<double> f(grid.points().begin(), grid.points().end());
  std::vector<std::array<cplx, 4>> rows;
  for (const cplx& v : s11) rows.push_back({v, cplx{}, cplx{}, cplx{}});
  write_file_atomic(path, format_lines(f, rows, 1, z0, format, comments));
}

// ---- files ---------------------------------------------------------------

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      fail(ErrorCode::IoError, "write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::IoError, "cannot move output into place at '" + path.string() + "'");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

// ---- design documents ----------------------------------------------------

FrequencyGrid SweepSpec::grid() const {
  return spacing == Spacing::Linear ? FrequencyGrid::linear(f_start_hz, f_stop_hz, n_points)
                                    : FrequencyGrid::logarithmic(f_start_hz, f_stop_hz, n_points);
}

MbvdParams parse_resonator(const json& j) {
  check_keys(j, {"c0", "r0", "rs", "ls", "branches"}, "resonator");
  MbvdParams p;
  p.c0 = number(j, "c0", "resonator");
  p.r0 = number_or(j, "r0", 0.0, "resonator");
  p.rs = number_or(j, "rs", 0.0, "resonator");
  p.ls = number_or(j, "ls", 0.0, "resonator");
  if (!j.contains("branches") || !j.at("branches").is_array()) {
    fail(ErrorCode::SchemaError, "resonator.branches must be a list");
  }
  for (const auto& b : j.at("branches")) p.branches.push_back(parse_branch(b, "resonator.branches[]"));
  p.validate();
  return p;
}

json resonator_to_json(const MbvdParams& p) {
  json branches = json::array();
  for (const auto& b : p.branches) branches.push_back(branch_json(b));
  return json{{"c0", p.c0}, {"r0", p.r0}, {"rs", p.rs}, {"ls", p.ls}, {"branches", branches}};
}

DesignDocument parse_design(const json& j) {
  check_keys(j,
             {"schema", "name", "topology", "lattice", "ladder", "resonators", "geometry", "port_refs_ohm",
              "sweep", "match", "stopbands_hz", "spurs", "free"},
             "design");
  check_schema(j, "design");
  DesignDocument doc;
  doc.design.name = j.contains("name") ? text(j, "name", "design") : std::string("design");
  const std::string topo = text(j, "topology", "design");

  // Resonators: explicit parameter sets first, then spurs, then scaled copies.
  if (!j.contains("resonators")) fail(ErrorCode::SchemaError, "design is missing 'resonators'");
  check_object(j.at("resonators"), "design.resonators");
  std::map<std::string, MbvdParams> res;
  std::vector<std::pair<std::string, const json*>> derived;
  for (const auto& [name, body] : j.at("resonators").items()) {
    check_object(body, "resonator '" + name + "'");
    if (body.contains("scale_of")) {
      check_keys(body, {"scale_of", "alpha"}, "resonator '" + name + "'");
      derived.emplace_back(name, &body);
    } else {
      try {
        res[name] = parse_resonator(body);
      } catch (const Error& e) {
        throw Error(e.code(), "resonator '" + name + "': " + e.what());
      }
    }
  }
  if (j.contains("spurs")) {
    check_object(j.at("spurs"), "design.spurs");
    for (const auto& [name, list] : j.at("spurs").items()) {
      if (!res.count(name)) fail(ErrorCode::SchemaError, "spurs refer to unknown resonator '" + name + "'");
      if (!list.is_array()) fail(ErrorCode::SchemaError, "spurs for '" + name + "' must be a list");
      for (const auto& s : list) res[name] = add_spur(res[name], parse_branch(s, "spur of '" + name + "'"));
    }
  }
  for (const auto& [name, body] : derived) {
    const std::string of = text(*body, "scale_of", "resonator '" + name + "'");
    if (!res.count(of)) fail(ErrorCode::SchemaError, "resonator '" + name + "' scales unknown '" + of + "'");
    const double alpha = number(*body, "alpha", "resonator '" + name + "'");
    if (!(alpha > 0.0)) fail(ErrorCode::SchemaError, "resonator '" + name + "': alpha must be > 0");
    res[name] = scale(res.at(of), alpha);
  }

  auto take = [&](std::initializer_list<const char*> names) {
    std::set<std::string> expected(names.begin(), names.end());
    for (const auto& [name, p] : res) {
      (void)p;
      if (!expected.count(name)) fail(ErrorCode::SchemaError, "resonator '" + name + "' is not used by " + topo);
    }
    for (const auto& n : expected) {
      if (!res.count(n)) fail(ErrorCode::SchemaError, topo + " needs a resonator named '" + n + "'");
    }
  };

  if (j.contains("lattice") && topo != "direct_lattice") {
    fail(ErrorCode::SchemaError, "'lattice' options only apply to direct_lattice");
  }
  if (j.contains("ladder") && topo != "ladder") fail(ErrorCode::SchemaError, "'ladder' only applies to ladder");

  if (topo == "canonical_lattice") {
    take({"A", "B"});
    doc.design.topology = CanonicalLatticeDesign{res.at("A"), res.at("B")};
  } else if (topo == "direct_lattice") {
    take({"A", "B"});
    DirectLatticeDesign d{res.at("A"), res.at("B")};
    if (j.contains("lattice")) {
      const json& l = j.at("lattice");
      check_keys(l, {"grounds", "fourth_arm"}, "design.lattice");
      if (l.contains("grounds")) {
        const std::string g = text(l, "grounds", "design.lattice");
        if (g == "tied") d.grounds = GroundMode::Tied;
        else if (g == "separate") d.grounds = GroundMode::Separate;
        else fail(ErrorCode::SchemaError, "lattice.grounds must be 'tied' or 'separate'");
      }
      if (l.contains("fourth_arm")) {
        const std::string a = text(l, "fourth_arm", "design.lattice");
        if (a == "present") d.fourth_arm = FourthArm::Present;
        else if (a == "dangling") d.fourth_arm = FourthArm::Dangling;
        else fail(ErrorCode::SchemaError, "lattice.fourth_arm must be 'present' or 'dangling'");
      }
    }
    doc.design.topology = d;
  } else if (topo == "layout_balanced") {
    take({"A1", "A2", "B"});
    doc.design.topology = LayoutBalancedDesign{res.at("A1"), res.at("A2"), res.at("B")};
  } else if (topo == "ladder") {
    if (!j.contains("ladder") || !j.at("ladder").is_array() || j.at("ladder").empty()) {
      fail(ErrorCode::SchemaError, "ladder topology needs a non-empty 'ladder' element list");
    }
    LadderDesign lad;
    std::set<std::string> used;
    for (const auto& e : j.at("ladder")) {
      check_keys(e, {"name", "placement"}, "ladder element");
      const std::string name = text(e, "name", "ladder element");
      const std::string pl = text(e, "placement", "ladder element");
      if (pl != "series" && pl != "shunt") fail(ErrorCode::SchemaError, "placement must be 'series' or 'shunt'");
      if (!res.count(name)) fail(ErrorCode::SchemaError, "ladder element refers to unknown resonator '" + name + "'");
      used.insert(name);
      lad.elements.push_back({pl == "series" ? Placement::Series : Placement::Shunt, name, res.at(name)});
    }
    for (const auto& [name, p] : res) {
      (void)p;
      if (!used.count(name)) fail(ErrorCode::SchemaError, "resonator '" + name + "' is not used by the ladder");
    }
    doc.design.topology = lad;
  } else {
    fail(ErrorCode::SchemaError, "unknown topology '" + topo + "'");
  }

  if (j.contains("port_refs_ohm")) {
    const json& r = j.at("port_refs_ohm");
    if (!r.is_array() || r.size() != 2) fail(ErrorCode::SchemaError, "port_refs_ohm must hold two impedances");
    doc.design.port_refs = {parse_cplx(r[0], "port_refs_ohm"), parse_cplx(r[1], "port_refs_ohm")};
    for (const cplx& z : doc.design.port_refs) {
      if (!(z.real() > 0.0)) fail(ErrorCode::NonPositiveReference, "port references need a positive real part");
    }
  }

  if (j.contains("geometry")) {
    check_object(j.at("geometry"), "design.geometry");
    for (const auto& [name, g] : j.at("geometry").items()) {
      if (!res.count(name)) fail(ErrorCode::SchemaError, "geometry for unknown resonator '" + name + "'");
      doc.geometry[name] = parse_geometry(g, "geometry '" + name + "'");
    }
  }

  if (!j.contains("sweep")) fail(ErrorCode::SchemaError, "design is missing 'sweep'");
  {
    const json& s = j.at("sweep");
    check_keys(s, {"f_start_hz", "f_stop_hz", "n_points", "spacing"}, "design.sweep");
    doc.sweep.f_start_hz = number(s, "f_start_hz", "design.sweep");
    doc.sweep.f_stop_hz = number(s, "f_stop_hz", "design.sweep");
    if (!s.contains("n_points") || !s.at("n_points").is_number_unsigned()) {
      fail(ErrorCode::SchemaError, "design.sweep.n_points must be a positive integer");
    }
    doc.sweep.n_points = s.at("n_points").get<std::size_t>();
    if (s.contains("spacing")) {
      const std::string sp = text(s, "spacing", "design.sweep");
      if (sp == "linear") doc.sweep.spacing = Spacing::Linear;
      else if (sp == "log" || sp == "logarithmic") doc.sweep.spacing = Spacing::Logarithmic;
      else fail(ErrorCode::SchemaError, "sweep.spacing must be 'linear' or 'log'");
    }
    doc.sweep.grid();
  }

  if (j.contains("match")) {
    const json& m = j.at("match");
    if (m.is_string()) {
      const std::string s = m.get<std::string>();
      if (s == "auto") doc.match.mode = MatchMode::Auto;
      else if (s == "none") doc.match.mode = MatchMode::None;
      else fail(ErrorCode::SchemaError, "match must be 'auto', 'none' or an impedance object");
    } else if (m.is_object() && m.contains("at_hz")) {
      check_keys(m, {"at_hz"}, "design.match");
      doc.match.mode = MatchMode::Auto;
      doc.match.at_hz = number(m, "at_hz", "design.match");
    } else {
      check_keys(m, {"z01_re", "z01_im", "z02_re", "z02_im"}, "design.match");
      doc.match.mode = MatchMode::Fixed;
      doc.match.fixed = {cplx{number(m, "z01_re", "design.match"), number_or(m, "z01_im", 0.0, "design.match")},
                         cplx{number(m, "z02_re", "design.match"), number_or(m, "z02_im", 0.0, "design.match")}};
      for (const cplx& z : doc.match.fixed) {
        if (!(z.real() > 0.0)) fail(ErrorCode::NonPositiveReference, "match impedances need a positive real part");
      }
    }
  }

  if (j.contains("stopbands_hz")) doc.stopbands = parse_stopbands(j.at("stopbands_hz"), "design.stopbands_hz");

  if (j.contains("free")) {
    if (!j.at("free").is_array()) fail(ErrorCode::SchemaError, "design.free must be a list");
    for (const auto& f : j.at("free")) {
      check_keys(f, {"path", "lower", "upper"}, "free parameter");
      FreeParameter fp{text(f, "path", "free parameter"), number(f, "lower", "free parameter"),
                       number(f, "upper", "free parameter")};
      get_parameter(doc.design, fp.path);
      doc.free.push_back(fp);
    }
  }
  return doc;
}

DesignDocument load_design(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
  return parse_design(j);
}

json design_to_json(const DesignDocument& doc) {
  json j;
  j["schema"] = kSchemaVersion;
  j["name"] = doc.design.name;
  j["topology"] = topology_name(doc.design.topology);
  json res = json::object();
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, LadderDesign>) {
          json lad = json::array();
          for (const auto& e : t.elements) {
            lad.push_back({{"name", e.name}, {"placement", e.placement == Placement::Series ? "series" : "shunt"}});
            res[e.name] = resonator_to_json(e.params);
          }
          j["ladder"] = lad;
        } else if constexpr (std::is_same_v<T, LayoutBalancedDesign>) {
          res["A1"] = resonator_to_json(t.a1);
          res["A2"] = resonator_to_json(t.a2);
          res["B"] = resonator_to_json(t.b);
        } else {
          res["A"] = resonator_to_json(t.a);
          res["B"] = resonator_to_json(t.b);
          if constexpr (std::is_same_v<T, DirectLatticeDesign>) {
            j["lattice"] = {{"grounds", t.grounds == GroundMode::Tied ? "tied" : "separate"},
                            {"fourth_arm", t.fourth_arm == FourthArm::Present ? "present" : "dangling"}};
          }
        }
      },
      doc.design.topology);
  j["resonators"] = res;
  j["port_refs_ohm"] = json::array({cplx_json(doc.design.port_refs[0]), cplx_json(doc.design.port_refs[1])});
  if (!doc.geometry.empty()) {
    json g = json::object();
    for (const auto& [name, geo] : doc.geometry) g[name] = geometry_json(geo);
    j["geometry"] = g;
  }
  j["sweep"] = {{"f_start_hz", doc.sweep.f_start_hz},
                {"f_stop_hz", doc.sweep.f_stop_hz},
                {"n_points", doc.sweep.n_points},
                {"spacing", doc.sweep.spacing == Spacing::Linear ? "linear" : "log"}};
  switch (doc.match.mode) {
    case MatchMode::None:
      j["match"] = "none";
      break;
    case MatchMode::Auto:
      if (doc.match.at_hz) j["match"] = {{"at_hz", *doc.match.at_hz}};
      else j["match"] = "auto";
      break;
    case MatchMode::Fixed:
      j["match"] = {{"z01_re", doc.match.fixed[0].real()},
                    {"z01_im", doc.match.fixed[0].imag()},
                    {"z02_re", doc.match.fixed[1].real()},
                    {"z02_im", doc.match.fixed[1].imag()}};
      break;
  }
  j["stopbands_hz"] = stopbands_json(doc.stopbands);
  if (!doc.free.empty()) {
    json f = json::array();
    for (const auto& fp : doc.free) f.push_back({{"path", fp.path}, {"lower", fp.lower}, {"upper", fp.upper}});
    j["free"] = f;
  }
  return j;
}

void save_design(const DesignDocument& doc, const std::filesystem::path& path) {
  write_file_atomic(path, design_to_json(doc).dump(2) + "\n");
}

TargetSpec parse_target_spec(const json& j) {
  check_keys(j,
             {"schema", "name", "f_c_target_hz", "f_c_tolerance", "fbw_min", "il_max_db", "oob_min_db",
              "stopbands_hz", "weights"},
             "target spec");
  check_schema(j, "target spec");
  TargetSpec s;
  s.f_c_target_hz = number_or(j, "f_c_target_hz", s.f_c_target_hz, "target spec");
  s.f_c_tolerance = number_or(j, "f_c_tolerance", s.f_c_tolerance, "target spec");
  s.fbw_min = number_or(j, "fbw_min", s.fbw_min, "target spec");
  s.il_max_db = number_or(j, "il_max_db", s.il_max_db, "target spec");
  s.oob_min_db = number_or(j, "oob_min_db", s.oob_min_db, "target spec");
  if (j.contains("stopbands_hz")) s.stopbands = parse_stopbands(j.at("stopbands_hz"), "target spec.stopbands_hz");
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    check_keys(w, {"il", "fbw", "oob", "fc"}, "target spec.weights");
    s.w_il = number_or(w, "il", s.w_il, "weights");
    s.w_fbw = number_or(w, "fbw", s.w_fbw, "weights");
    s.w_oob = number_or(w, "oob", s.w_oob, "weights");
    s.w_fc = number_or(w, "fc", s.w_fc, "weights");
  }
  s.validate();
  return s;
}

TargetSpec load_target_spec(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
  return parse_target_spec(j);
}

// ---- reports -------------------------------------------------------------

namespace {

std::string metrics_header(std::size_t n_stop) {
  std::string h = "f_c_Hz,il_min_dB,fbw_pct,f_lo_Hz,f_hi_Hz,ripple_dB,oob_dB";
  for (std::size_t i = 0; i < n_stop; ++i) h += ",oob_" + std::to_string(i + 1) + "_dB";
  return h;
}

std::string metrics_row(const FilterMetrics& m) {
  std::string r = csv_number(m.f_c_hz) + "," + csv_number(m.il_min_db) + "," + csv_number(100.0 * m.fbw_3db) + "," +
                  csv_number(m.f_lo_hz) + "," + csv_number(m.f_hi_hz) + "," + csv_number(m.ripple_db) + "," +
                  csv_number(m.worst_oob_db());
  for (double v : m.oob_rejection_db) r += "," + csv_number(v);
  return r;
}

}  // namespace

std::string metrics_csv(const FilterMetrics& m) {
  return metrics_header(m.oob_rejection_db.size()) + "\n" + metrics_row(m) + "\n";
}

std::string comparison_csv(const std::vector<std::pair<std::string, FilterMetrics>>& rows) {
  if (rows.empty()) fail(ErrorCode::InvalidArgument, "comparison needs at least one row");
  const std::size_t n = rows.front().second.oob_rejection_db.size();
  std::string out = "design," + metrics_header(n) + "\n";
  for (const auto& [label, m] : rows) {
    if (m.oob_rejection_db.size() != n) fail(ErrorCode::InvalidArgument, "rows disagree on stopband count");
    if (label.find_first_of(",\"\n") != std::string::npos) {
      fail(ErrorCode::InvalidArgument, "design labels may not contain commas, quotes or newlines");
    }
    out += label + "," + metrics_row(m) + "\n";
  }
  return out;
}

std::string history_csv(const OptimizeResult& r, const std::vector<FreeParameter>& free) {
  std::string out = "evaluation,start,cost,best_cost";
  for (const auto& fp : free) out += "," + fp.path;
  out += "\n";
  for (const auto& h : r.history) {
    out += std::to_string(h.evaluation) + "," + std::to_string(h.start) + "," + csv_number(h.cost) + "," +
           csv_number(h.best_cost);
    for (double v : h.values) out += "," + csv_number(v);
    out += "\n";
  }
  return out;
}

json match_report(const MatchSolution& sol) {
  json ports = json::array();
  for (int i = 0; i < 2; ++i) {
    ports.push_back({{"port", i + 1},
                     {"gamma_m", cplx_json(sol.gamma_m[i])},
                     {"z0_match_ohm", sol.z0_match[i] ? cplx_json(*sol.z0_match[i]) : json(nullptr)},
                     {"b", sol.b[i]},
                     {"c", cplx_json(sol.c[i])}});
  }
  return json{{"schema", kSchemaVersion},
              {"f_design_hz", sol.f_design_hz},
              {"z0_ohm", sol.z0},
              {"delta", cplx_json(sol.delta)},
              {"rollett_k", sol.rollett_k},
              {"feasible", sol.feasible},
              {"boundary", sol.boundary},
              {"ports", ports}};
}

json fit_params_json(const FitResult& fit) {
  return json{{"schema", kSchemaVersion},
              {"resonator", resonator_to_json(fit.params)},
              {"residual_rms", fit.residual_rms},
              {"converged", fit.converged},
              {"caveat", kFitLossCaveat}};
}

std::string fit_report_csv(const FitResult& fit) {
  std::string out = std::string("# ") + kFitLossCaveat + "\n";
  out += "branch,mode,fs_Hz,fp_Hz,k2,q,rm_ohm,lm_H,cm_F,fs_error_rel\n";
  for (std::size_t i = 0; i < fit.params.branches.size(); ++i) {
    const auto& b = fit.params.branches[i];
    double fp = std::nan(""), k2 = std::nan("");
    try {
      fp = antiresonance(fit.params, i);
      k2 = coupling(fit.params, i);
    } catch (const Error&) {
    }
    const double err = i < fit.branch_frequency_errors.size() ? fit.branch_frequency_errors[i] : std::nan("");
    out += std::to_string(i) + "," + b.mode.str() + "," + csv_number(series_resonance(b)) + "," + csv_number(fp) +
           "," + csv_number(k2) + "," + csv_number(quality_factor(b)) + "," + csv_number(b.rm) + "," +
           csv_number(b.lm) + "," + csv_number(b.cm) + "," + csv_number(err) + "\n";
  }
  out += "# residual_rms," + csv_number(fit.residual_rms) + "\n";
  return out;
}

}  // namespace xlat
