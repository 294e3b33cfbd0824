#include "optwin/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "optwin/errors.hpp"

namespace optwin {

std::string format_number(double v) {
  if (!std::isfinite(v)) {
    raise(ErrorKind::Io, "non-finite value reached an output serializer");
  }
  if (v == 0.0) return "0";  // collapses -0 as well
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

namespace {

void escape_string(const std::string& s, std::string& out) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void dump_value(const nlohmann::json& j, std::string& out, int indent, int depth) {
  const bool compact = indent <= 0;
  const std::string pad = compact ? "" : std::string(static_cast<size_t>(indent) * depth, ' ');
  const std::string pad_in =
      compact ? "" : std::string(static_cast<size_t>(indent) * (depth + 1), ' ');
  const char* nl = compact ? "" : "\n";
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad_in;
        escape_string(it.key(), out);
        out += compact ? ":" : ": ";
        dump_value(it.value(), out, indent, depth + 1);
      }
      out += nl + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad_in;
        dump_value(v, out, indent, depth + 1);
      }
      out += nl + pad + "]";
      return;
    }
    case nlohmann::json::value_t::string:
      escape_string(j.get<std::string>(), out);
      return;
    case nlohmann::json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case nlohmann::json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      return;
    case nlohmann::json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      return;
    case nlohmann::json::value_t::number_float:
      out += format_number(j.get<double>());
      return;
    case nlohmann::json::value_t::null:
      out += "null";
      return;
    default:
      raise(ErrorKind::Io, "unsupported JSON value type in canonical dump");
  }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& j, int indent) {
  std::string out;
  dump_value(j, out, indent, 0);
  if (indent > 0) out += "\n";
  return out;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) raise(ErrorKind::Io, "cannot open for writing: " + path);
  f << contents;
  if (!f) raise(ErrorKind::Io, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(ErrorKind::Io, "cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace optwin
