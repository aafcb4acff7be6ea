#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace evp {

enum class ParamKind { integer, choice, flag };

using ParamValue = std::variant<std::int64_t, bool, std::string>;

/// Text form used in parameter files and reports ("true"/"false" for flags).
std::string to_text(const ParamValue& v);

/// Describes one string-keyed solver parameter.
///
/// Integer parameters either list their admissible values in `domain` or,
/// when `domain` is empty, accept any value in [min_value, max_value].
struct ParameterDescriptor {
  std::string name;
  ParamKind kind = ParamKind::integer;
  std::vector<ParamValue> domain;
  std::int64_t min_value = 0;
  std::int64_t max_value = 0;
  std::optional<ParamValue> default_value;
  bool tunable = false;
  bool required = false;
  std::string help;

  bool admits(const ParamValue& v) const;
  /// Parses `text` according to `kind`; throws ValueOutOfDomain.
  ParamValue parse(std::string_view text) const;
  std::string domain_text() const;
};

/// Ordered, immutable set of descriptors.
class ParameterRegistry {
 public:
  explicit ParameterRegistry(std::vector<ParameterDescriptor> descriptors);

  const ParameterDescriptor& find(std::string_view name) const;  // throws UnknownParameter
  const ParameterDescriptor* lookup(std::string_view name) const noexcept;
  const std::vector<ParameterDescriptor>& descriptors() const noexcept { return descriptors_; }

 private:
  std::vector<ParameterDescriptor> descriptors_;
};

/// The solver's registry: na, nev, solver, kernel, band_width, tridiag_block,
/// backtransform_block, cholesky_block, precision, convert_method and the
/// four step_precision_* keys.
const ParameterRegistry& default_registry();

/// Where the current value of a parameter came from.
enum class Provenance { default_value, set, tuned };

std::string_view to_string(Provenance p);

/// Current values of every registry parameter plus their provenance.
class ParameterStore {
 public:
  explicit ParameterStore(const ParameterRegistry& registry = default_registry());

  void set(std::string_view name, const ParamValue& value,
           Provenance provenance = Provenance::set);
  /// Parses `text` with the descriptor's kind, then behaves like set().
  void set_text(std::string_view name, std::string_view text,
                Provenance provenance = Provenance::set);

  /// Throws MissingRequired for a required parameter that has no value.
  const ParamValue& get(std::string_view name) const;
  std::int64_t get_int(std::string_view name) const;
  const std::string& get_string(std::string_view name) const;
  bool get_flag(std::string_view name) const;
  bool has_value(std::string_view name) const;
  Provenance provenance(std::string_view name) const;

  const ParameterRegistry& registry() const noexcept { return *registry_; }

  /// Parameter-file text: explicitly set and tuned values as `name = value`,
  /// defaults as comments.
  std::string to_text() const;
  /// Applies a parameter file. Unknown keys, bad values and malformed lines
  /// raise ParseError carrying the 1-based line number.
  void apply_text(std::string_view text, Provenance provenance = Provenance::set);
  /// One line per parameter: name, value and provenance.
  std::string describe() const;
  /// Every parameter with a value, in registry order.
  std::vector<std::pair<std::string, std::string>> items() const;

 private:
  struct Entry {
    std::optional<ParamValue> value;
    Provenance provenance = Provenance::default_value;
  };
  const ParameterRegistry* registry_;
  std::map<std::string, Entry, std::less<>> entries_;
};

/// 64-bit FNV-1a of a string, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace evp
