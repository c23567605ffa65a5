#include "mvf/mvf.h"

#include <iostream>
#include <memory>
#include <string>
#include <variant>

#include "mvf/commands.hpp"
#include "mvf/grid.hpp"
#include "mvf/snapshot.hpp"
#include "mvf/version.hpp"

struct mvf_grid {
  mvf::Grid grid;
};

struct mvf_field {
  std::variant<mvf::Field<1>, mvf::Field<2>, mvf::Field<3>, mvf::Field<4>> f;
};

namespace {

thread_local std::string g_last_error;

mvf_status status_for(mvf::ErrorKind kind) {
  using K = mvf::ErrorKind;
  switch (kind) {
    case K::structural: return MVF_ERR_STRUCTURAL;
    case K::usage: return MVF_ERR_USAGE;
    case K::compatibility: return MVF_ERR_COMPATIBILITY;
    case K::convergence: return MVF_ERR_CONVERGENCE;
    case K::step: return MVF_ERR_STEP;
    case K::stagnation: return MVF_ERR_STAGNATION;
    case K::config: return MVF_ERR_CONFIG;
    case K::io: return MVF_ERR_IO;
    case K::check: return MVF_ERR_CHECK;
  }
  return MVF_ERR_INTERNAL;
}

template <class Fn>
mvf_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MVF_OK;
  } catch (const mvf::Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MVF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MVF_ERR_INTERNAL;
  }
}

mvf_status invalid(const char* what) {
  g_last_error = what;
  return MVF_ERR_INVALID_ARGUMENT;
}

mvf::Bc to_bc(mvf_bc bc) {
  switch (bc) {
    case MVF_BC_DIRICHLET_ZERO: return mvf::Bc::dirichlet_zero;
    case MVF_BC_NEUMANN_ZERO: return mvf::Bc::neumann_zero;
    default: return mvf::Bc::none;
  }
}

const mvf::Grid& grid_of(const mvf_field* f) {
  return std::visit([](const auto& x) -> const mvf::Grid& { return x.grid(); }, f->f);
}

template <int C>
mvf_field* wrap(mvf::Field<C> f) {
  return new mvf_field{std::move(f)};
}

mvf_field* from_snapshot(const mvf::Snapshot& s) {
  const auto bc = s.bc.front();
  switch (s.values.cols()) {
    case 1: { mvf::Field<1> f(s.grid, bc); f.values() = s.values; return wrap(std::move(f)); }
    case 2: { mvf::Field<2> f(s.grid, bc); f.values() = s.values; return wrap(std::move(f)); }
    case 3: { mvf::Field<3> f(s.grid, bc); f.values() = s.values; return wrap(std::move(f)); }
    case 4: { mvf::Field<4> f(s.grid, bc); f.values() = s.values; return wrap(std::move(f)); }
    default:
      throw mvf::Error(mvf::ErrorKind::io, "snapshot has " + std::to_string(s.values.cols()) +
                                               " components; fields support 1 to 4");
  }
}

}  // namespace

extern "C" {

const char* mvf_version(void) { return mvf::kVersion; }

const char* mvf_last_error(void) { return g_last_error.c_str(); }

const char* mvf_status_name(mvf_status status) {
  switch (status) {
    case MVF_OK: return "ok";
    case MVF_ERR_STRUCTURAL: return "structural";
    case MVF_ERR_USAGE: return "usage";
    case MVF_ERR_COMPATIBILITY: return "compatibility";
    case MVF_ERR_CONVERGENCE: return "convergence";
    case MVF_ERR_STEP: return "step";
    case MVF_ERR_STAGNATION: return "stagnation";
    case MVF_ERR_CONFIG: return "config";
    case MVF_ERR_IO: return "io";
    case MVF_ERR_CHECK: return "check";
    case MVF_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case MVF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

mvf_status mvf_grid_create(int nx, int ny, double lx, double ly, mvf_grid** out) {
  if (!out) return invalid("mvf_grid_create: out is null");
  return guard([&] { *out = new mvf_grid{mvf::Grid(nx, ny, lx, ly)}; });
}

void mvf_grid_destroy(mvf_grid* grid) { delete grid; }

mvf_status mvf_grid_shape(const mvf_grid* grid, int* nx, int* ny, double* lx, double* ly) {
  if (!grid) return invalid("mvf_grid_shape: grid is null");
  if (nx) *nx = grid->grid.nx();
  if (ny) *ny = grid->grid.ny();
  if (lx) *lx = grid->grid.lx();
  if (ly) *ly = grid->grid.ly();
  return MVF_OK;
}

size_t mvf_grid_nodes(const mvf_grid* grid) {
  return grid ? static_cast<size_t>(grid->grid.nodes()) : 0;
}

mvf_status mvf_field_create(const mvf_grid* grid, int components, mvf_bc bc, mvf_field** out) {
  if (!grid || !out) return invalid("mvf_field_create: null argument");
  return guard([&] {
    const auto b = to_bc(bc);
    switch (components) {
      case 1: *out = wrap(mvf::Field<1>(grid->grid, b)); break;
      case 2: *out = wrap(mvf::Field<2>(grid->grid, b)); break;
      case 3: *out = wrap(mvf::Field<3>(grid->grid, b)); break;
      case 4: *out = wrap(mvf::Field<4>(grid->grid, b)); break;
      default:
        throw mvf::Error(mvf::ErrorKind::usage, "components must be 1, 2, 3 or 4");
    }
  });
}

void mvf_field_destroy(mvf_field* field) { delete field; }

int mvf_field_components(const mvf_field* field) {
  if (!field) return 0;
  return std::visit([](const auto& x) { return std::decay_t<decltype(x)>::components; }, field->f);
}

mvf_status mvf_field_get(const mvf_field* field, double* values, size_t count) {
  if (!field || !values) return invalid("mvf_field_get: null argument");
  return guard([&] {
    std::visit(
        [&](const auto& x) {
          const auto n = static_cast<size_t>(x.values().size());
          if (count != n) throw mvf::Error(mvf::ErrorKind::structural, "buffer size mismatch");
          size_t k = 0;
          for (Eigen::Index node = 0; node < x.values().rows(); ++node)
            for (Eigen::Index c = 0; c < x.values().cols(); ++c) values[k++] = x.values()(node, c);
        },
        field->f);
  });
}

mvf_status mvf_field_set(mvf_field* field, const double* values, size_t count) {
  if (!field || !values) return invalid("mvf_field_set: null argument");
  return guard([&] {
    std::visit(
        [&](auto& x) {
          const auto n = static_cast<size_t>(x.values().size());
          if (count != n) throw mvf::Error(mvf::ErrorKind::structural, "buffer size mismatch");
          size_t k = 0;
          for (Eigen::Index node = 0; node < x.values().rows(); ++node)
            for (Eigen::Index c = 0; c < x.values().cols(); ++c) x.values()(node, c) = values[k++];
        },
        field->f);
  });
}

mvf_status mvf_field_write(const mvf_field* field, const char* path, double time) {
  if (!field || !path) return invalid("mvf_field_write: null argument");
  return guard([&] { std::visit([&](const auto& x) { mvf::write_field(path, x, time); }, field->f); });
}

mvf_status mvf_field_read(const char* path, mvf_field** out, double* time) {
  if (!path || !out) return invalid("mvf_field_read: null argument");
  return guard([&] {
    const auto snap = mvf::read_snapshot(path);
    *out = from_snapshot(snap);
    if (time) *time = snap.time;
  });
}

mvf_status mvf_gradient(const mvf_field* scalar, mvf_field** out) {
  if (!scalar || !out) return invalid("mvf_gradient: null argument");
  return guard([&] {
    const auto* f = std::get_if<mvf::Field<1>>(&scalar->f);
    if (!f) throw mvf::Error(mvf::ErrorKind::structural, "gradient needs a scalar field");
    *out = wrap(mvf::gradient_scalar(*f));
  });
}

mvf_status mvf_divergence(const mvf_field* vector2, mvf_field** out) {
  if (!vector2 || !out) return invalid("mvf_divergence: null argument");
  return guard([&] {
    const auto* f = std::get_if<mvf::Field<2>>(&vector2->f);
    if (!f) throw mvf::Error(mvf::ErrorKind::structural, "divergence needs a 2-vector field");
    *out = wrap(mvf::divergence(*f));
  });
}

mvf_status mvf_laplacian(const mvf_field* field, mvf_field** out) {
  if (!field || !out) return invalid("mvf_laplacian: null argument");
  return guard([&] {
    *out = std::visit([](const auto& x) { return wrap(mvf::laplacian(x)); }, field->f);
  });
}

mvf_status mvf_norm_l2(const mvf_field* field, double* out) {
  if (!field || !out) return invalid("mvf_norm_l2: null argument");
  return guard([&] { *out = std::visit([](const auto& x) { return mvf::norm_l2(x); }, field->f); });
}

mvf_status mvf_inner_l2(const mvf_field* a, const mvf_field* b, double* out) {
  if (!a || !b || !out) return invalid("mvf_inner_l2: null argument");
  return guard([&] {
    if (a->f.index() != b->f.index()) {
      throw mvf::Error(mvf::ErrorKind::structural, "inner product of different field kinds");
    }
    *out = std::visit(
        [&](const auto& x) {
          using F = std::decay_t<decltype(x)>;
          return mvf::inner_l2(x, std::get<F>(b->f));
        },
        a->f);
  });
}

mvf_status mvf_leray_project(const mvf_field* f, double tolerance, mvf_field** u, mvf_field** p) {
  if (!f || !u || !p) return invalid("mvf_leray_project: null argument");
  return guard([&] {
    const auto* v = std::get_if<mvf::Field<2>>(&f->f);
    if (!v) throw mvf::Error(mvf::ErrorKind::structural, "Leray projection needs a 2-vector field");
    mvf::CgOptions opts;
    if (tolerance > 0.0) opts.tolerance = tolerance;
    auto r = mvf::leray_project(*v, opts);
    (void)grid_of(f);
    *u = wrap(std::move(r.u));
    *p = wrap(std::move(r.p));
  });
}

void mvf_run_options_init(mvf_run_options* opts) {
  if (!opts) return;
  opts->config_path = nullptr;
  opts->output_dir = nullptr;
  opts->seed = 42;
  opts->has_seed = 0;
  opts->quiet = 0;
  opts->corrupt_adjoint = 1.0;
}

mvf_status mvf_run_command(const char* command, const mvf_run_options* opts, int* exit_code) {
  if (!command || !exit_code) return invalid("mvf_run_command: null argument");
  return guard([&] {
    mvf::CommandOptions o;
    if (opts) {
      if (opts->config_path) o.config_path = opts->config_path;
      if (opts->output_dir) o.output_dir = opts->output_dir;
      if (opts->has_seed) o.seed = opts->seed;
      o.quiet = opts->quiet != 0;
      o.corrupt_adjoint = opts->corrupt_adjoint;
    }
    *exit_code = mvf::run_command(command, o, std::cout, std::cerr);
  });
}

}  // extern "C"
