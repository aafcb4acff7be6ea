#include "evp/parameters.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "evp/errors.hpp"

namespace evp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

ParameterDescriptor integer_choice(std::string name, std::vector<std::int64_t> values,
                                   std::int64_t def, bool tunable, std::string help) {
  ParameterDescriptor d;
  d.name = std::move(name);
  d.kind = ParamKind::integer;
  for (auto v : values) d.domain.emplace_back(v);
  d.default_value = ParamValue(def);
  d.tunable = tunable;
  d.help = std::move(help);
  return d;
}

ParameterDescriptor string_choice(std::string name, std::vector<std::string> values,
                                  std::string def, bool tunable, std::string help) {
  ParameterDescriptor d;
  d.name = std::move(name);
  d.kind = ParamKind::choice;
  for (auto& v : values) d.domain.emplace_back(std::move(v));
  d.default_value = ParamValue(std::move(def));
  d.tunable = tunable;
  d.help = std::move(help);
  return d;
}

ParameterDescriptor required_integer(std::string name, std::int64_t lo, std::int64_t hi,
                                     std::string help) {
  ParameterDescriptor d;
  d.name = std::move(name);
  d.kind = ParamKind::integer;
  d.min_value = lo;
  d.max_value = hi;
  d.required = true;
  d.help = std::move(help);
  return d;
}

}  // namespace

std::string to_text(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  return std::get<std::string>(v);
}

bool ParameterDescriptor::admits(const ParamValue& v) const {
  switch (kind) {
    case ParamKind::integer: {
      const auto* i = std::get_if<std::int64_t>(&v);
      if (i == nullptr) return false;
      if (domain.empty()) return *i >= min_value && *i <= max_value;
      break;
    }
    case ParamKind::choice:
      if (!std::holds_alternative<std::string>(v)) return false;
      break;
    case ParamKind::flag:
      return std::holds_alternative<bool>(v);
  }
  for (const auto& d : domain)
    if (d == v) return true;
  return false;
}

ParamValue ParameterDescriptor::parse(std::string_view text) const {
  text = trim(text);
  ParamValue v;
  switch (kind) {
    case ParamKind::integer: {
      std::int64_t x = 0;
      const auto* end = text.data() + text.size();
      const auto [ptr, ec] = std::from_chars(text.data(), end, x);
      if (ec != std::errc() || ptr != end || text.empty())
        throw ValueOutOfDomain(name, std::string(text));
      v = x;
      break;
    }
    case ParamKind::choice:
      v = std::string(text);
      break;
    case ParamKind::flag:
      if (text == "true" || text == "1") {
        v = true;
      } else if (text == "false" || text == "0") {
        v = false;
      } else {
        throw ValueOutOfDomain(name, std::string(text));
      }
      break;
  }
  if (!admits(v)) throw ValueOutOfDomain(name, std::string(text));
  return v;
}

std::string ParameterDescriptor::domain_text() const {
  if (kind == ParamKind::flag) return "{true, false}";
  if (domain.empty()) return "[" + std::to_string(min_value) + ", " + std::to_string(max_value) + "]";
  std::string s = "{";
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (i) s += ", ";
    s += to_text(domain[i]);
  }
  return s + "}";
}

ParameterRegistry::ParameterRegistry(std::vector<ParameterDescriptor> descriptors)
    : descriptors_(std::move(descriptors)) {
  for (std::size_t i = 0; i < descriptors_.size(); ++i) {
    const auto& d = descriptors_[i];
    for (std::size_t j = 0; j < i; ++j)
      if (descriptors_[j].name == d.name)
        throw ArgumentError("duplicate parameter '" + d.name + "' in registry");
    if (d.default_value && !d.admits(*d.default_value))
      throw ArgumentError("default of parameter '" + d.name + "' is outside its domain");
    if (!d.default_value && !d.required)
      throw ArgumentError("optional parameter '" + d.name + "' needs a default");
  }
}

const ParameterDescriptor* ParameterRegistry::lookup(std::string_view name) const noexcept {
  for (const auto& d : descriptors_)
    if (d.name == name) return &d;
  return nullptr;
}

const ParameterDescriptor& ParameterRegistry::find(std::string_view name) const {
  if (const auto* d = lookup(name)) return *d;
  throw UnknownParameter(std::string(name));
}

const ParameterRegistry& default_registry() {
  static const ParameterRegistry registry([] {
    std::vector<ParameterDescriptor> r;
    r.push_back(required_integer("na", 1, std::int64_t{1} << 20, "matrix order"));
    r.push_back(required_integer("nev", 0, std::int64_t{1} << 20, "number of eigenvectors sought"));
    r.push_back(integer_choice("solver", {1, 2}, 2, true, "1 = one-stage, 2 = two-stage reduction"));
    r.push_back(string_choice("kernel", {"generic", "blocked", "wide"}, "generic", true,
                              "reflector back-transformation kernel"));
    r.push_back(integer_choice("band_width", {4, 8, 16, 32, 64}, 32, true,
                               "semi-bandwidth of the intermediate band matrix (solver 2)"));
    r.push_back(integer_choice("tridiag_block", {16, 32, 64, 128}, 64, true,
                               "panel width of the one-stage tridiagonalization"));
    r.push_back(integer_choice("backtransform_block", {16, 32, 64}, 32, true,
                               "reflectors applied per pass in back-transformations"));
    r.push_back(integer_choice("cholesky_block", {32, 64, 128}, 64, true,
                               "panel width of the Cholesky factorization"));
    r.push_back(string_choice("precision", {"sp", "dp"}, "dp", false,
                              "working precision of every step set to inherit"));
    r.push_back(string_choice("convert_method", {"elementwise", "block"}, "elementwise", false,
                              "how matrices are converted between precisions"));
    const std::vector<std::string> step_domain{"sp", "dp", "inherit"};
    r.push_back(string_choice("step_precision_cholesky", step_domain, "inherit", false,
                              "precision of the Cholesky factorization"));
    r.push_back(string_choice("step_precision_invert", step_domain, "inherit", false,
                              "precision of the triangular inversion"));
    r.push_back(string_choice("step_precision_multiply", step_domain, "inherit", false,
                              "precision of the reduction to standard form and its back-transformation"));
    r.push_back(string_choice("step_precision_esolve", step_domain, "inherit", false,
                              "precision of the standard eigensolver"));
    return r;
  }());
  return registry;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::default_value:
      return "default";
    case Provenance::set:
      return "set";
    case Provenance::tuned:
      return "tuned";
  }
  return "?";
}

ParameterStore::ParameterStore(const ParameterRegistry& registry) : registry_(&registry) {
  for (const auto& d : registry.descriptors()) entries_[d.name] = Entry{d.default_value, Provenance::default_value};
}

void ParameterStore::set(std::string_view name, const ParamValue& value, Provenance provenance) {
  const auto& d = registry_->find(name);
  if (!d.admits(value)) throw ValueOutOfDomain(d.name, evp::to_text(value));
  auto& e = entries_.find(name)->second;
  e.value = value;
  e.provenance = provenance;
}

void ParameterStore::set_text(std::string_view name, std::string_view text, Provenance provenance) {
  const auto& d = registry_->find(name);
  set(name, d.parse(text), provenance);
}

const ParamValue& ParameterStore::get(std::string_view name) const {
  const auto& d = registry_->find(name);
  const auto& e = entries_.find(name)->second;
  if (!e.value) throw MissingRequired(d.name);
  return *e.value;
}

std::int64_t ParameterStore::get_int(std::string_view name) const {
  const auto& v = get(name);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw ArgumentError("parameter '" + std::string(name) + "' is not an integer");
}

const std::string& ParameterStore::get_string(std::string_view name) const {
  const auto& v = get(name);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw ArgumentError("parameter '" + std::string(name) + "' is not a string");
}

bool ParameterStore::get_flag(std::string_view name) const {
  const auto& v = get(name);
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw ArgumentError("parameter '" + std::string(name) + "' is not a flag");
}

bool ParameterStore::has_value(std::string_view name) const {
  registry_->find(name);
  return entries_.find(name)->second.value.has_value();
}

Provenance ParameterStore::provenance(std::string_view name) const {
  registry_->find(name);
  return entries_.find(name)->second.provenance;
}

std::string ParameterStore::to_text() const {
  std::string out;
  for (const auto& d : registry_->descriptors()) {
    const auto& e = entries_.find(d.name)->second;
    if (!e.value) {
      out += "# " + d.name + " (unset)\n";
    } else if (e.provenance == Provenance::default_value) {
      out += "# " + d.name + " = " + evp::to_text(*e.value) + " (default)\n";
    } else {
      out += d.name + " = " + evp::to_text(*e.value) + "\n";
    }
  }
  return out;
}

void ParameterStore::apply_text(std::string_view text, Provenance provenance) {
  // Validate everything first so a bad file leaves the store untouched.
  std::vector<std::pair<std::string, ParamValue>> pending;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'name = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing parameter name");
    const auto* d = registry_->lookup(key);
    if (d == nullptr) throw ParseError(line_no, "unknown parameter '" + std::string(key) + "'");
    try {
      pending.emplace_back(std::string(key), d->parse(value));
    } catch (const ValueOutOfDomain& e) {
      throw ParseError(line_no, e.what());
    }
  }
  for (const auto& [k, v] : pending) set(k, v, provenance);
}

std::string ParameterStore::describe() const {
  std::ostringstream os;
  for (const auto& d : registry_->descriptors()) {
    const auto& e = entries_.find(d.name)->second;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-26s %-12s %s\n", d.name.c_str(),
                  e.value ? evp::to_text(*e.value).c_str() : "-",
                  e.value ? std::string(to_string(e.provenance)).c_str() : "unset");
    os << buf;
  }
  return os.str();
}

std::vector<std::pair<std::string, std::string>> ParameterStore::items() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& d : registry_->descriptors()) {
    const auto& e = entries_.find(d.name)->second;
    if (e.value) out.emplace_back(d.name, evp::to_text(*e.value));
  }
  return out;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace evp
