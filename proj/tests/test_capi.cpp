#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "mvf/mvf.h"

namespace {

struct Grid {
  mvf_grid* g = nullptr;
  Grid(int nx, int ny) { REQUIRE(mvf_grid_create(nx, ny, 1.0, 1.0, &g) == MVF_OK); }
  ~Grid() { mvf_grid_destroy(g); }
};

struct Field {
  mvf_field* f = nullptr;
  ~Field() { mvf_field_destroy(f); }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(mvf_version()) == "0.1.0");
  CHECK(std::string(mvf_status_name(MVF_ERR_CONFIG)) == "config");
}

TEST_CASE("grid handles") {
  Grid g(10, 12);
  int nx = 0, ny = 0;
  double lx = 0, ly = 0;
  CHECK(mvf_grid_shape(g.g, &nx, &ny, &lx, &ly) == MVF_OK);
  CHECK(nx == 10);
  CHECK(ny == 12);
  CHECK(mvf_grid_nodes(g.g) == 11 * 13);
  mvf_grid* bad = nullptr;
  CHECK(mvf_grid_create(2, 2, 1.0, 1.0, &bad) == MVF_ERR_STRUCTURAL);
  CHECK(bad == nullptr);
  CHECK(std::strlen(mvf_last_error()) > 0);
  CHECK(mvf_grid_create(8, 8, 1.0, 1.0, nullptr) == MVF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("field values and operators") {
  Grid g(16, 16);
  const std::size_t n = mvf_grid_nodes(g.g);
  Field s;
  REQUIRE(mvf_field_create(g.g, 1, MVF_BC_NONE, &s.f) == MVF_OK);
  CHECK(mvf_field_components(s.f) == 1);
  std::vector<double> vals(n);
  for (int j = 0; j <= 16; ++j)
    for (int i = 0; i <= 16; ++i) vals[j * 17 + i] = 3.0 * i / 16.0;  // f = 3x
  REQUIRE(mvf_field_set(s.f, vals.data(), n) == MVF_OK);
  CHECK(mvf_field_set(s.f, vals.data(), n - 1) == MVF_ERR_STRUCTURAL);

  Field grad;
  REQUIRE(mvf_gradient(s.f, &grad.f) == MVF_OK);
  CHECK(mvf_field_components(grad.f) == 2);
  std::vector<double> gv(2 * n);
  REQUIRE(mvf_field_get(grad.f, gv.data(), gv.size()) == MVF_OK);
  for (std::size_t k = 0; k < n; ++k) {
    CHECK(gv[2 * k] == doctest::Approx(3.0));
    CHECK(gv[2 * k + 1] == doctest::Approx(0.0));
  }
  Field div;
  REQUIRE(mvf_divergence(grad.f, &div.f) == MVF_OK);
  double nrm = -1;
  REQUIRE(mvf_norm_l2(div.f, &nrm) == MVF_OK);
  CHECK(nrm < 1e-12);
  Field lap;
  CHECK(mvf_laplacian(s.f, &lap.f) == MVF_ERR_USAGE);  // needs a boundary rule
  REQUIRE(mvf_field_create(g.g, 1, MVF_BC_NEUMANN_ZERO, &lap.f) == MVF_OK);
  Field lap2;
  REQUIRE(mvf_laplacian(lap.f, &lap2.f) == MVF_OK);
  double ip = -1;
  REQUIRE(mvf_inner_l2(s.f, s.f, &ip) == MVF_OK);
  CHECK(ip == doctest::Approx(3.0 + 3.0 / 512.0).epsilon(1e-14));  // trapezoid rule for 9 x^2
  CHECK(mvf_divergence(s.f, &div.f) == MVF_ERR_STRUCTURAL);
  CHECK(mvf_inner_l2(s.f, grad.f, &ip) == MVF_ERR_STRUCTURAL);
}

TEST_CASE("Leray projection through the C interface") {
  Grid g(16, 16);
  const std::size_t n = mvf_grid_nodes(g.g);
  Field phi;
  REQUIRE(mvf_field_create(g.g, 1, MVF_BC_NONE, &phi.f) == MVF_OK);
  std::vector<double> vals(n);
  for (int j = 0; j <= 16; ++j)
    for (int i = 0; i <= 16; ++i) vals[j * 17 + i] = std::sin(3.0 * i / 16.0) * std::cos(2.0 * j / 16.0);
  mvf_field_set(phi.f, vals.data(), n);
  Field grad, u, p;
  REQUIRE(mvf_gradient(phi.f, &grad.f) == MVF_OK);
  REQUIRE(mvf_leray_project(grad.f, 1e-12, &u.f, &p.f) == MVF_OK);
  double nu = 0, ng = 0;
  mvf_norm_l2(u.f, &nu);
  mvf_norm_l2(grad.f, &ng);
  CHECK(nu <= 1e-9 * ng);
}

TEST_CASE("snapshots through the C interface") {
  Grid g(8, 8);
  const std::size_t n = mvf_grid_nodes(g.g);
  Field f;
  REQUIRE(mvf_field_create(g.g, 3, MVF_BC_NEUMANN_ZERO, &f.f) == MVF_OK);
  std::vector<double> vals(3 * n);
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = 1.0 / (1.0 + static_cast<double>(k));
  mvf_field_set(f.f, vals.data(), vals.size());
  const auto path = (std::filesystem::temp_directory_path() / "mvf_capi.snap").string();
  REQUIRE(mvf_field_write(f.f, path.c_str(), 0.5) == MVF_OK);
  Field r;
  double t = 0;
  REQUIRE(mvf_field_read(path.c_str(), &r.f, &t) == MVF_OK);
  CHECK(t == 0.5);
  std::vector<double> back(3 * n);
  mvf_field_get(r.f, back.data(), back.size());
  CHECK(std::memcmp(back.data(), vals.data(), sizeof(double) * vals.size()) == 0);
  Field missing;
  CHECK(mvf_field_read("/nonexistent/x.snap", &missing.f, nullptr) == MVF_ERR_IO);
}

TEST_CASE("run options and unknown commands") {
  mvf_run_options o;
  mvf_run_options_init(&o);
  CHECK(o.corrupt_adjoint == 1.0);
  CHECK(o.has_seed == 0);
  o.quiet = 1;
  int code = 0;
  CHECK(mvf_run_command("nonsense", &o, &code) == MVF_OK);
  CHECK(code != 0);
}
