#include "pshlab/report.hpp"

#include <cmath>
#include <cstdio>

namespace pshlab {

JsonValue JsonValue::object() {
  JsonValue v;
  v.kind_ = Kind::Object;
  return v;
}

JsonValue JsonValue::array() {
  JsonValue v;
  v.kind_ = Kind::Array;
  return v;
}

JsonValue& JsonValue::set(const std::string& key, JsonValue v) {
  if (kind_ != Kind::Object) throw ExprError("JsonValue::set on non-object");
  for (auto& [k, old] : members_) {
    if (k == key) {
      old = std::move(v);
      return *this;
    }
  }
  members_.emplace_back(key, std::move(v));
  return *this;
}

JsonValue& JsonValue::push(JsonValue v) {
  if (kind_ != Kind::Array) throw ExprError("JsonValue::push on non-array");
  items_.push_back(std::move(v));
  return *this;
}

namespace {
void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void append_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}
}  // namespace

void JsonValue::dump_to(std::string& out, int indent, int depth) const {
  auto pad = [&](int d) {
    if (indent > 0) {
      out += '\n';
      out.append(static_cast<std::size_t>(indent) * d, ' ');
    }
  };
  switch (kind_) {
    case Kind::Null: out += "null"; break;
    case Kind::Bool: out += bool_ ? "true" : "false"; break;
    case Kind::Int: out += std::to_string(int_); break;
    case Kind::Double: append_number(out, double_); break;
    case Kind::String: append_escaped(out, string_); break;
    case Kind::Array: {
      if (items_.empty()) {
        out += "[]";
        break;
      }
      out += '[';
      for (std::size_t i = 0; i < items_.size(); ++i) {
        if (i) out += ',';
        pad(depth + 1);
        items_[i].dump_to(out, indent, depth + 1);
      }
      pad(depth);
      out += ']';
      break;
    }
    case Kind::Object: {
      if (members_.empty()) {
        out += "{}";
        break;
      }
      out += '{';
      for (std::size_t i = 0; i < members_.size(); ++i) {
        if (i) out += ',';
        pad(depth + 1);
        append_escaped(out, members_[i].first);
        out += indent > 0 ? ": " : ":";
        members_[i].second.dump_to(out, indent, depth + 1);
      }
      pad(depth);
      out += '}';
      break;
    }
  }
}

std::string JsonValue::dump(int indent) const {
  std::string out;
  dump_to(out, indent, 0);
  out += '\n';
  return out;
}

JsonValue json_of(const Point4& p) {
  JsonValue arr = JsonValue::array();
  arr.push(p.x).push(p.y).push(p.u).push(p.v);
  return arr;
}

JsonValue json_of(const Certificate& c) {
  JsonValue out = JsonValue::object();
  out.set("condition", to_string(c.condition));
  out.set("verdict", to_string(c.verdict));
  if (!c.note.empty()) out.set("note", c.note);
  JsonValue levels = JsonValue::array();
  for (const auto& st : c.levels) {
    JsonValue lv = JsonValue::object();
    lv.set("samples", st.n_samples);
    lv.set("max_ratio", st.max_ratio);
    lv.set("argmax", json_of(st.argmax));
    lv.set("argmax_num", st.argmax_num);
    lv.set("argmax_den", st.argmax_den);
    lv.set("max_residual", st.max_residual);
    lv.set("count_below_lambda_min", st.count_below_lambda_min);
    lv.set("min_abs_g", st.min_abs_g);
    levels.push(std::move(lv));
  }
  out.set("levels", std::move(levels));
  JsonValue wit = JsonValue::array();
  for (const auto& w : c.witnesses) {
    JsonValue jw = JsonValue::object();
    jw.set("point", json_of(w.point));
    jw.set("value", w.value);
    jw.set("what", w.what);
    wit.push(std::move(jw));
  }
  out.set("witnesses", std::move(wit));
  JsonValue tols = JsonValue::object();
  tols.set("tol", c.tol);
  tols.set("lambda_min", c.lambda_min);
  tols.set("growth_cap", c.growth_cap);
  out.set("tolerances", std::move(tols));
  out.set("empirical_constant", c.empirical_constant);
  return out;
}

JsonValue json_of(const TypeReport& r) {
  JsonValue out = JsonValue::object();
  out.set("point", json_of(r.point));
  out.set("pseudoconvex", to_string(r.convexity));
  if (r.c_p)
    out.set("c_p", *r.c_p);
  else
    out.set("c_p", std::string("exceeds max_order ") + std::to_string(r.max_order));
  JsonValue derivs = JsonValue::object();
  for (const auto& [word, value] : r.lambda_derivs) {
    JsonValue pair = JsonValue::array();
    pair.push(value.real()).push(value.imag());
    derivs.set(word.empty() ? "lambda" : word, std::move(pair));
  }
  out.set("lambda_derivs", std::move(derivs));
  out.set("strict4", to_string(r.strict4));
  if (r.kohn4)
    out.set("kohn4", *r.kohn4);
  else
    out.set("kohn4", JsonValue());
  JsonValue tols = JsonValue::object();
  tols.set("tol_zero", r.tol_zero);
  tols.set("tol_bdry", r.tol_bdry);
  tols.set("max_order", r.max_order);
  out.set("tolerances", std::move(tols));
  return out;
}

JsonValue json_of(const GalleryEntry& e) {
  JsonValue out = JsonValue::object();
  out.set("id", e.id);
  JsonValue params = JsonValue::object();
  for (const auto& [k, v] : e.params) params.set(k, v);
  out.set("params", std::move(params));
  JsonValue props = JsonValue::array();
  for (const auto& p : e.properties) props.push(p);
  out.set("properties", std::move(props));
  return out;
}

std::string witnesses_csv(const Certificate& c) {
  std::string out = "x,y,u,v,value,what\n";
  char buf[160];
  for (const auto& w : c.witnesses) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,", w.point.x, w.point.y,
                  w.point.u, w.point.v, w.value);
    out += buf;
    for (char ch : w.what) out += (ch == ',' || ch == '\n') ? ';' : ch;
    out += '\n';
  }
  return out;
}

JsonValue make_report(const std::string& command, JsonValue config, JsonValue result) {
  JsonValue out = JsonValue::object();
  out.set("schema", kReportSchema);
  out.set("command", command);
  out.set("config", std::move(config));
  out.set("result", std::move(result));
  return out;
}

}  // namespace pshlab
