#include "lowmach_cli/cli.hpp"

#include "lowmach/error.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <fstream>
#include <sstream>

namespace lowmach::cli {

namespace {

nlohmann::json from_toml(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, value] : *t) out[std::string(key.str())] = from_toml(value);
    return out;
  }
  if (const auto* a = node.as_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& value : *a) out.push_back(from_toml(value));
    return out;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  throw ValidationError("unsupported TOML value (dates and times are not accepted)", "config");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'", "config");
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  if (ends_with(path, ".json")) {
    try {
      doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("malformed JSON config: ") + e.what(), "config");
    }
  } else {
    try {
      doc = from_toml(toml::parse(buf.str(), path));
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << "malformed TOML config: " << e.description() << " (line " << e.source().begin.line << ")";
      throw ValidationError(msg.str(), "config");
    }
  }
  if (!doc.is_object()) throw ValidationError("config must be a table/object at the top level", "config");
  return doc;
}

Section::Section(nlohmann::json doc, std::string path) : doc_(std::move(doc)), path_(std::move(path)) {
  if (doc_.is_null()) doc_ = nlohmann::json::object();
  if (!doc_.is_object()) throw ValidationError("expected a table", path_.empty() ? "config" : path_);
}

std::string Section::field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

bool Section::has(const std::string& key) const { return doc_.contains(key); }

const nlohmann::json* Section::lookup(const std::string& key) {
  used_.insert(key);
  auto it = doc_.find(key);
  return it == doc_.end() ? nullptr : &*it;
}

double Section::number(const std::string& key, double fallback) {
  const auto* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_number()) throw ValidationError("expected a number", field(key));
  return v->get<double>();
}

long Section::integer(const std::string& key, long fallback) {
  const auto* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ValidationError("expected an integer", field(key));
  return v->get<long>();
}

bool Section::boolean(const std::string& key, bool fallback) {
  const auto* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ValidationError("expected true or false", field(key));
  return v->get<bool>();
}

std::string Section::string(const std::string& key, const std::string& fallback) {
  const auto* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_string()) throw ValidationError("expected a string", field(key));
  return v->get<std::string>();
}

std::vector<double> Section::numbers(const std::string& key, const std::vector<double>& fallback) {
  const auto* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_array()) throw ValidationError("expected an array of numbers", field(key));
  std::vector<double> out;
  for (const auto& e : *v) {
    if (!e.is_number()) throw ValidationError("expected an array of numbers", field(key));
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> Section::integers(const std::string& key, const std::vector<int>& fallback) {
  const auto* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_array()) throw ValidationError("expected an array of integers", field(key));
  std::vector<int> out;
  for (const auto& e : *v) {
    if (!e.is_number_integer()) throw ValidationError("expected an array of integers", field(key));
    out.push_back(e.get<int>());
  }
  return out;
}

Section Section::section(const std::string& key) {
  const auto* v = lookup(key);
  if (!v) return Section(nlohmann::json::object(), field(key));
  if (!v->is_object()) throw ValidationError("expected a table", field(key));
  return Section(*v, field(key));
}

void Section::finish() const {
  for (auto it = doc_.begin(); it != doc_.end(); ++it)
    if (!used_.count(it.key())) throw ValidationError("unknown key", field(it.key()));
}

}  // namespace lowmach::cli
