#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sprid/lti.hpp"

namespace sprid {

enum class FrequencyUnit { kHz, kRadPerSec };

std::string to_string(FrequencyUnit unit);

/// Frequency-response file: "# ts=<seconds> units=<hz|rad_s>" header followed by
/// whitespace-separated "freq re im" rows. Lines starting with '#' are comments.
struct FrfFile {
  double ts = 1.0;
  FrequencyUnit units = FrequencyUnit::kRadPerSec;
  std::vector<double> freqs;  ///< as written, in `units`
  std::vector<Complex> values;

  FrequencyResponse to_response() const;
  static FrfFile from_response(const FrequencyResponse& response, FrequencyUnit units = FrequencyUnit::kRadPerSec);
};

FrfFile parse_frf(std::istream& in, const std::string& source = "<stream>");
FrfFile parse_frf(const std::filesystem::path& path);
void emit_frf(std::ostream& out, const FrfFile& file);

/// Time-domain file: "# ts=<seconds>" header followed by "k u y" rows with
/// consecutive integer k.
struct TioFile {
  double ts = 1.0;
  long first_index = 0;
  std::vector<double> u;
  std::vector<double> y;
};

TioFile parse_tio(std::istream& in, const std::string& source = "<stream>");
TioFile parse_tio(const std::filesystem::path& path);
void emit_tio(std::ostream& out, const TioFile& file);

/// Fitted-model file. Layout (see docs/file_formats.md):
///
///   # sprident model v1
///   # config <key>=<value>     one line per resolved config entry
///   <key>=<value>              scalar header fields
///   [theta] / [num] / [den] / [active_omegas]   one number per line
struct ModelFile {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::string>> fields;
  std::vector<double> theta;
  std::vector<double> num;
  std::vector<double> den;
  std::vector<double> active_omegas;

  /// Value of a header field; throws ParseError when missing.
  const std::string& field(const std::string& key) const;
  double number(const std::string& key) const;
  RationalTf transfer_function() const;
};

void emit_model(std::ostream& out, const ModelFile& model);
ModelFile parse_model(std::istream& in, const std::string& source = "<stream>");
ModelFile parse_model(const std::filesystem::path& path);

/// Shortest round-trippable text for a double ("%.17g").
std::string format_number(double value);

}  // namespace sprid
