#include "sprid/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "sprid/error.hpp"

namespace sprid {

std::string to_string(FrequencyUnit unit) { return unit == FrequencyUnit::kHz ? "hz" : "rad_s"; }

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

bool parse_double(const std::string& text, double& value) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

double require_double(const std::string& text, const std::string& source, std::size_t line_no) {
  double v = 0.0;
  if (!parse_double(text, v) || !std::isfinite(v)) {
    throw ParseError(fmt::format("{}:{}: '{}' is not a finite number", source, line_no, text));
  }
  return v;
}

/// Reads "key=value" tokens of a '#' header line.
std::vector<std::pair<std::string, std::string>> header_pairs(const std::string& line) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const std::string& tok : split_ws(line.substr(1))) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

}  // namespace

FrequencyResponse FrfFile::to_response() const {
  std::vector<double> omegas(freqs);
  if (units == FrequencyUnit::kHz) {
    for (double& w : omegas) w *= 2.0 * std::numbers::pi;
    // 2*pi*f for f = 1/(2 ts) can land one ulp above pi/ts.
    const double nyquist = std::numbers::pi / ts;
    for (double& w : omegas) w = std::min(w, nyquist);
  }
  return FrequencyResponse(std::move(omegas), values, ts);
}

FrfFile FrfFile::from_response(const FrequencyResponse& response, FrequencyUnit units) {
  FrfFile out;
  out.ts = response.ts();
  out.units = units;
  out.freqs = response.omegas();
  if (units == FrequencyUnit::kHz) {
    for (double& f : out.freqs) f /= 2.0 * std::numbers::pi;
  }
  out.values = response.values();
  return out;
}

FrfFile parse_frf(std::istream& in, const std::string& source) {
  FrfFile out;
  bool have_ts = false;
  bool have_units = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.front().front() == '#') {
      for (const auto& [key, value] : header_pairs(line)) {
        if (key == "ts") {
          out.ts = require_double(value, source, line_no);
          if (!(out.ts > 0.0)) throw ParseError(fmt::format("{}:{}: ts must be positive", source, line_no));
          have_ts = true;
        } else if (key == "units") {
          if (value == "hz") {
            out.units = FrequencyUnit::kHz;
          } else if (value == "rad_s") {
            out.units = FrequencyUnit::kRadPerSec;
          } else {
            throw ParseError(fmt::format("{}:{}: unknown units '{}' (expected hz or rad_s)", source, line_no, value));
          }
          have_units = true;
        }
      }
      continue;
    }
    if (!have_ts || !have_units) {
      throw ParseError(fmt::format("{}:{}: data before the '# ts=... units=...' header", source, line_no));
    }
    if (tokens.size() != 3) {
      throw ParseError(fmt::format("{}:{}: expected 3 columns (freq re im), found {}", source, line_no, tokens.size()));
    }
    const double f = require_double(tokens[0], source, line_no);
    const double re = require_double(tokens[1], source, line_no);
    const double im = require_double(tokens[2], source, line_no);
    const double nyquist = out.units == FrequencyUnit::kHz ? 0.5 / out.ts : std::numbers::pi / out.ts;
    if (f < 0.0) throw ParseError(fmt::format("{}:{}: negative frequency {}", source, line_no, f));
    if (f > nyquist * (1.0 + 1e-12)) {
      throw ParseError(fmt::format("{}:{}: frequency {} {} above Nyquist ({})", source, line_no, f,
                                   to_string(out.units), nyquist));
    }
    if (!out.freqs.empty() && !(f > out.freqs.back())) {
      throw ParseError(fmt::format("{}:{}: frequencies must be strictly increasing", source, line_no));
    }
    out.freqs.push_back(f);
    out.values.emplace_back(re, im);
  }
  if (!have_ts || !have_units) throw ParseError(fmt::format("{}: missing '# ts=... units=...' header", source));
  if (out.freqs.empty()) throw ParseError(fmt::format("{}: no samples", source));
  return out;
}

FrfFile parse_frf(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_frf(in, path.string());
}

void emit_frf(std::ostream& out, const FrfFile& file) {
  out << "# ts=" << format_number(file.ts) << " units=" << to_string(file.units) << '\n';
  for (std::size_t i = 0; i < file.freqs.size(); ++i) {
    out << format_number(file.freqs[i]) << ' ' << format_number(file.values[i].real()) << ' '
        << format_number(file.values[i].imag()) << '\n';
  }
}

TioFile parse_tio(std::istream& in, const std::string& source) {
  TioFile out;
  bool have_ts = false;
  std::string line;
  std::size_t line_no = 0;
  long expected = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.front().front() == '#') {
      for (const auto& [key, value] : header_pairs(line)) {
        if (key == "ts") {
          out.ts = require_double(value, source, line_no);
          if (!(out.ts > 0.0)) throw ParseError(fmt::format("{}:{}: ts must be positive", source, line_no));
          have_ts = true;
        }
      }
      continue;
    }
    if (!have_ts) throw ParseError(fmt::format("{}:{}: data before the '# ts=...' header", source, line_no));
    if (tokens.size() != 3) {
      throw ParseError(fmt::format("{}:{}: expected 3 columns (k u y), found {}", source, line_no, tokens.size()));
    }
    long k = 0;
    auto [ptr, ec] = std::from_chars(tokens[0].data(), tokens[0].data() + tokens[0].size(), k);
    if (ec != std::errc() || ptr != tokens[0].data() + tokens[0].size()) {
      throw ParseError(fmt::format("{}:{}: sample index '{}' is not an integer", source, line_no, tokens[0]));
    }
    if (out.u.empty()) {
      out.first_index = k;
    } else if (k != expected) {
      throw ParseError(fmt::format("{}:{}: non-uniform sampling, expected index {} but found {}", source, line_no,
                                   expected, k));
    }
    expected = k + 1;
    out.u.push_back(require_double(tokens[1], source, line_no));
    out.y.push_back(require_double(tokens[2], source, line_no));
  }
  if (!have_ts) throw ParseError(fmt::format("{}: missing '# ts=...' header", source));
  if (out.u.empty()) throw ParseError(fmt::format("{}: no samples", source));
  return out;
}

TioFile parse_tio(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_tio(in, path.string());
}

void emit_tio(std::ostream& out, const TioFile& file) {
  out << "# ts=" << format_number(file.ts) << '\n';
  for (std::size_t i = 0; i < file.u.size(); ++i) {
    out << file.first_index + static_cast<long>(i) << ' ' << format_number(file.u[i]) << ' '
        << format_number(file.y[i]) << '\n';
  }
}

const std::string& ModelFile::field(const std::string& key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  throw ParseError(fmt::format("model file: missing field '{}'", key));
}

double ModelFile::number(const std::string& key) const {
  double v = 0.0;
  if (!parse_double(field(key), v)) throw ParseError(fmt::format("model file: field '{}' is not a number", key));
  return v;
}

RationalTf ModelFile::transfer_function() const {
  if (num.empty() || den.empty()) throw ParseError("model file: missing [num] or [den] block");
  try {
    return RationalTf(num, den, number("ts"));
  } catch (const ConfigError& e) {
    throw ParseError(fmt::format("model file: invalid transfer function: {}", e.what()));
  }
}

void emit_model(std::ostream& out, const ModelFile& model) {
  out << "# sprident model v1\n";
  for (const auto& [k, v] : model.config) out << "# config " << k << '=' << v << '\n';
  for (const auto& [k, v] : model.fields) out << k << '=' << v << '\n';
  const auto block = [&out](const char* name, const std::vector<double>& values) {
    out << '[' << name << "]\n";
    for (double v : values) out << format_number(v) << '\n';
  };
  block("theta", model.theta);
  block("num", model.num);
  block("den", model.den);
  block("active_omegas", model.active_omegas);
}

ModelFile parse_model(std::istream& in, const std::string& source) {
  ModelFile out;
  std::vector<double>* block = nullptr;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.front().front() == '#') {
      if (tokens.size() >= 3 && tokens[1] == "config") {
        const auto eq = tokens[2].find('=');
        if (eq != std::string::npos) out.config.emplace_back(tokens[2].substr(0, eq), tokens[2].substr(eq + 1));
      }
      continue;
    }
    if (tokens.size() != 1) throw ParseError(fmt::format("{}:{}: unexpected whitespace in '{}'", source, line_no, line));
    const std::string& tok = tokens.front();
    if (tok.front() == '[' && tok.back() == ']') {
      const std::string name = tok.substr(1, tok.size() - 2);
      if (name == "theta") block = &out.theta;
      else if (name == "num") block = &out.num;
      else if (name == "den") block = &out.den;
      else if (name == "active_omegas") block = &out.active_omegas;
      else throw ParseError(fmt::format("{}:{}: unknown block '{}'", source, line_no, name));
      continue;
    }
    if (block) {
      block->push_back(require_double(tok, source, line_no));
      continue;
    }
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParseError(fmt::format("{}:{}: expected key=value", source, line_no));
    out.fields.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  if (out.fields.empty()) throw ParseError(fmt::format("{}: empty model file", source));
  return out;
}

ModelFile parse_model(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_model(in, path.string());
}

}  // namespace sprid
