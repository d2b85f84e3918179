#include "pinchlab/pinchlab.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "pinchlab/collar.hpp"
#include "pinchlab/errors.hpp"
#include "pinchlab/pinch.hpp"
#include "pinchlab/report.hpp"

struct pl_collar {
  pinchlab::CollarParams params;
};
struct pl_schedule {
  pinchlab::PinchSchedule sched;
};
struct pl_curve {
  pinchlab::PinchSchedule sched;
  pinchlab::CurveConfig cfg;
  pinchlab::CurveReport rep;
};
struct pl_config {
  pinchlab::RunConfig cfg;
};
struct pl_report {
  pinchlab::SuiteOutput out;
};

namespace {

struct LastError {
  std::string message;
  int line = 0;
  int column = 0;
};
thread_local LastError last_error;

pl_status fail(pl_status s, const std::string& msg, int line = 0, int column = 0) {
  last_error = {msg, line, column};
  return s;
}

// Runs body and maps exceptions to status codes.
template <class F>
pl_status guard(F&& body) {
  try {
    body();
    return PL_OK;
  } catch (const pinchlab::ParseError& e) {
    return fail(PL_ERR_PARSE, e.what(), e.line(), e.column());
  } catch (const pinchlab::DomainError& e) {
    return fail(PL_ERR_DOMAIN, e.what());
  } catch (const pinchlab::UnsupportedInput& e) {
    return fail(PL_ERR_UNSUPPORTED, e.what());
  } catch (const pinchlab::StructuralError& e) {
    return fail(PL_ERR_STRUCTURE, e.what());
  } catch (const pinchlab::HypothesisViolation& e) {
    return fail(PL_ERR_HYPOTHESIS, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PL_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

#define PL_REQUIRE(cond) \
  if (!(cond)) return fail(PL_ERR_ARGUMENT, "invalid argument: " #cond)

}  // namespace

extern "C" {

const char* pl_version(void) { return "1.0.0"; }

const char* pl_status_name(pl_status s) {
  switch (s) {
    case PL_OK: return "ok";
    case PL_ERR_DOMAIN: return "domain error";
    case PL_ERR_UNSUPPORTED: return "unsupported input";
    case PL_ERR_STRUCTURE: return "structural error";
    case PL_ERR_HYPOTHESIS: return "hypothesis violation";
    case PL_ERR_PARSE: return "parse error";
    case PL_ERR_ARGUMENT: return "invalid argument";
    case PL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* pl_last_error_message(void) { return last_error.message.c_str(); }
int pl_last_error_line(void) { return last_error.line; }
int pl_last_error_column(void) { return last_error.column; }
void pl_string_free(char* s) { std::free(s); }

// ---- collar -----------------------------------------------------------------

pl_status pl_collar_create(double ell, pl_collar** out) {
  PL_REQUIRE(out);
  *out = nullptr;
  return guard([&] { *out = new pl_collar{pinchlab::CollarParams(ell)}; });
}
void pl_collar_destroy(pl_collar* c) { delete c; }
double pl_collar_ell(const pl_collar* c) { return c ? c->params.ell() : 0.0; }
double pl_collar_half_width(const pl_collar* c) { return c ? c->params.half_width() : 0.0; }
double pl_collar_tau_max(const pl_collar* c) { return c ? c->params.tau_max() : 0.0; }

pl_status pl_collar_rho(const pl_collar* c, double s, double* out) {
  PL_REQUIRE(c && out);
  return guard([&] { *out = pinchlab::conformal_factor(c->params, s); });
}
pl_status pl_collar_dist_to_boundary(const pl_collar* c, double s, double* out) {
  PL_REQUIRE(c && out);
  return guard([&] { *out = pinchlab::dist_to_boundary(c->params, s); });
}
pl_status pl_collar_inj(const pl_collar* c, double s, double* out) {
  PL_REQUIRE(c && out);
  return guard([&] { *out = pinchlab::injectivity_radius(c->params, s); });
}
pl_status pl_collar_area(const pl_collar* c, double s1, double s2, double* out) {
  PL_REQUIRE(c && out);
  return guard([&] { *out = pinchlab::collar_area(c->params, s1, s2); });
}
pl_status pl_inj_bounds(double d, double* lo, double* hi) {
  PL_REQUIRE(lo && hi);
  return guard([&] {
    const auto b = pinchlab::inj_bounds(d);
    *lo = b.lo;
    *hi = b.hi;
  });
}
pl_status pl_collar_bound_sweep(const pl_collar* c, double r, size_t n, int* passed, double* worst_slack) {
  PL_REQUIRE(c && passed && worst_slack);
  return guard([&] {
    const auto rep = pinchlab::pointwise_bound_sweep(c->params, r, n);
    *passed = rep.passed() ? 1 : 0;
    *worst_slack = std::min({rep.rho_ratio.worst_relative_slack, rep.inj_vs_rho.worst_relative_slack,
                             rep.inj_comparison.worst_relative_slack});
  });
}

// ---- schedules and curves -----------------------------------------------------

pl_status pl_schedule_parse(const char* text, pl_schedule** out) {
  PL_REQUIRE(text && out);
  *out = nullptr;
  return guard([&] { *out = new pl_schedule{pinchlab::PinchSchedule::parse(text)}; });
}
void pl_schedule_destroy(pl_schedule* s) { delete s; }
pl_status pl_schedule_to_json(const pl_schedule* s, char** out) {
  PL_REQUIRE(s && out);
  return guard([&] { *out = dup(s->sched.to_json()); });
}

void pl_curve_config_default(pl_curve_config* cfg) {
  if (!cfg) return;
  const pinchlab::CurveConfig d;
  *cfg = {d.time_samples, d.d_samples, d.window, d.delta};
}

pl_status pl_curve_simulate(const pl_schedule* s, const pl_curve_config* cfg, pl_curve** out) {
  PL_REQUIRE(s && out);
  *out = nullptr;
  return guard([&] {
    pinchlab::CurveConfig c;
    if (cfg) c = {cfg->time_samples, cfg->d_samples, cfg->window, cfg->delta};
    if (c.time_samples < 2 || c.d_samples < 2) throw pinchlab::DomainError("curve: need at least 2 time and d samples");
    if (!(c.window > 0.0) || !(c.delta > 0.0)) throw pinchlab::DomainError("curve: window and delta must be positive");
    auto rep = pinchlab::simulate(s->sched, c);
    *out = new pl_curve{s->sched, c, std::move(rep)};
  });
}
void pl_curve_destroy(pl_curve* c) { delete c; }
int pl_curve_finite_length(const pl_curve* c) { return c && c->rep.finite_length ? 1 : 0; }
size_t pl_curve_warning_count(const pl_curve* c) { return c ? c->rep.warnings.size() : 0; }
const char* pl_curve_warning(const pl_curve* c, size_t i) {
  return c && i < c->rep.warnings.size() ? c->rep.warnings[i].c_str() : nullptr;
}
pl_status pl_curve_csv(const pl_curve* c, char** out) {
  PL_REQUIRE(c && out);
  return guard([&] { *out = dup(pinchlab::curve_table(c->rep).to_csv()); });
}
pl_status pl_curve_json(const pl_curve* c, char** out) {
  PL_REQUIRE(c && out);
  return guard([&] { *out = dup(pinchlab::curve_to_json(c->rep, c->sched, c->cfg)); });
}

// ---- verification -------------------------------------------------------------

pl_status pl_config_create(pl_config** out) {
  PL_REQUIRE(out);
  *out = nullptr;
  return guard([&] { *out = new pl_config{}; });
}
void pl_config_destroy(pl_config* c) { delete c; }
pl_status pl_config_set_ell_range(pl_config* c, double ell_min, double ell_max) {
  PL_REQUIRE(c);
  c->cfg.ell_min = ell_min;
  c->cfg.ell_max = ell_max;
  return PL_OK;
}
pl_status pl_config_set_samples(pl_config* c, size_t n) {
  PL_REQUIRE(c);
  c->cfg.samples = n;
  return PL_OK;
}
pl_status pl_config_set_grid(pl_config* c, size_t n) {
  PL_REQUIRE(c);
  c->cfg.grid = n;
  return PL_OK;
}
pl_status pl_config_set_time_grid(pl_config* c, size_t n) {
  PL_REQUIRE(c);
  c->cfg.time_grid = n;
  return PL_OK;
}
pl_status pl_config_set_tolerance(pl_config* c, const char* name, double value) {
  PL_REQUIRE(c && name);
  return guard([&] {
    auto trial = c->cfg;
    trial.tolerances[name] = value;
    trial.validate();
    c->cfg = std::move(trial);
  });
}
pl_status pl_config_set_schedule(pl_config* c, const char* text) {
  PL_REQUIRE(c && text);
  return guard([&] {
    pinchlab::PinchSchedule::parse(text);
    c->cfg.schedule = std::string(text);
  });
}
pl_status pl_config_validate(const pl_config* c) {
  PL_REQUIRE(c);
  return guard([&] { c->cfg.validate(); });
}

size_t pl_suite_count(void) { return pinchlab::suite_ids().size(); }
const char* pl_suite_id(size_t i) {
  const auto& ids = pinchlab::suite_ids();
  return i < ids.size() ? ids[i].c_str() : nullptr;
}

pl_status pl_verify(const char* suite_id, const pl_config* cfg, pl_report** out) {
  PL_REQUIRE(suite_id && out);
  *out = nullptr;
  return guard([&] {
    const pinchlab::RunConfig def;
    *out = new pl_report{pinchlab::run_suite(suite_id, cfg ? cfg->cfg : def)};
  });
}
void pl_report_destroy(pl_report* r) { delete r; }
int pl_report_passed(const pl_report* r) { return r && r->out.report.passed() ? 1 : 0; }
pl_status pl_report_json(const pl_report* r, char** out) {
  PL_REQUIRE(r && out);
  return guard([&] { *out = dup(r->out.report.to_json()); });
}
size_t pl_report_record_count(const pl_report* r) { return r ? r->out.report.records.size() : 0; }
pl_status pl_report_summary(const pl_report* r, char** out) {
  PL_REQUIRE(r && out);
  return guard([&] {
    std::string s;
    for (const auto& rec : r->out.report.records) {
      s += (rec.passed ? "PASS " : "FAIL ") + rec.id;
      if (!rec.passed && !rec.note.empty()) s += ": " + rec.note;
      s += '\n';
    }
    *out = dup(s);
  });
}
size_t pl_report_table_count(const pl_report* r) { return r ? r->out.tables.size() : 0; }
const char* pl_report_table_name(const pl_report* r, size_t i) {
  return r && i < r->out.tables.size() ? r->out.tables[i].name.c_str() : nullptr;
}
pl_status pl_report_table_csv(const pl_report* r, size_t i, char** out) {
  PL_REQUIRE(r && out && i < r->out.tables.size());
  return guard([&] { *out = dup(r->out.tables[i].to_csv()); });
}

pl_status pl_csv_schema_doc(char** out) {
  PL_REQUIRE(out);
  return guard([&] {
    std::string s;
    for (const auto& t : pinchlab::table_schemas()) {
      s += std::string("  ") + t.command + " -> " + t.table + ".csv\n";
      for (const auto& c : t.columns) s += std::string("      ") + c.name + ": " + c.meaning + "\n";
    }
    *out = dup(s);
  });
}
pl_status pl_tolerance_doc(char** out) {
  PL_REQUIRE(out);
  return guard([&] {
    std::string s;
    for (const auto& t : pinchlab::default_tolerances())
      s += std::string("  ") + t.name + " = " + pinchlab::format_number(t.value) + ": " + t.meaning + "\n";
    *out = dup(s);
  });
}

}  // extern "C"
