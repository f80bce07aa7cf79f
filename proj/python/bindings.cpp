#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "htmean/bounds.hpp"
#include "htmean/constants.hpp"
#include "htmean/datagen.hpp"
#include "htmean/estimators.hpp"
#include "htmean/space.hpp"
#include "htmean/truncation.hpp"

namespace py = pybind11;
using namespace htmean;

namespace {

SpaceSpec make_space(const std::string& kind, double alpha, int dim) {
  if (kind == "euclidean") return SpaceSpec::euclidean(dim);
  if (kind == "lp") return SpaceSpec::lp(alpha, dim);
  throw std::invalid_argument("space kind must be euclidean|lp");
}

GeneratorSpec make_gen(const std::string& kind, double a, int64_t dim,
                       const Vec& mean_offset, double mart_coeff,
                       double sigma_min, double sigma_max) {
  GeneratorSpec g;
  g.kind = gen_kind_from_string(kind);
  g.a = a;
  g.dim = dim;
  g.mean_offset = mean_offset;
  g.mart_coeff = mart_coeff;
  g.sigma_min = sigma_min;
  g.sigma_max = sigma_max;
  validate_spec(g);
  return g;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "heavy-tailed mean estimation in smooth Banach spaces";

  py::class_<SpaceSpec>(m, "SpaceSpec")
      .def(py::init(&make_space), py::arg("kind") = "euclidean",
           py::arg("alpha") = 2.0, py::arg("dim") = 1)
      .def_static("euclidean", &SpaceSpec::euclidean, py::arg("dim"))
      .def_static("lp", &SpaceSpec::lp, py::arg("alpha"), py::arg("dim"))
      .def_readonly("alpha", &SpaceSpec::alpha)
      .def_readonly("dim", &SpaceSpec::dim)
      .def_property_readonly(
          "kind", [](const SpaceSpec& s) { return to_string(s.kind); })
      .def("__repr__", [](const SpaceSpec& s) {
        return "SpaceSpec(" + to_string(s.kind) +
               ", alpha=" + std::to_string(s.alpha) +
               ", dim=" + std::to_string(s.dim) + ")";
      });

  py::class_<MomentAssumption>(m, "MomentAssumption")
      .def(py::init([](double p, double v, bool central) {
             return MomentAssumption{p, v, central};
           }),
           py::arg("p") = 2.0, py::arg("v") = 1.0, py::arg("central") = true)
      .def_readwrite("p", &MomentAssumption::p)
      .def_readwrite("v", &MomentAssumption::v)
      .def_readwrite("central", &MomentAssumption::central);

  m.def("norm", &norm, py::arg("space"), py::arg("x"));
  m.def("beta", &beta, py::arg("space"));

  m.def("k_p", &k_p, py::arg("p"));
  m.def("frak_c",
        py::overload_cast<const SpaceSpec&, double, double>(&frak_c),
        py::arg("space"), py::arg("p"), py::arg("rho"));
  m.def("frak_c", py::overload_cast<const SpaceSpec&, double>(&frak_c),
        py::arg("space"), py::arg("p"));
  m.def("c_p_combined", &c_p_combined, py::arg("space"), py::arg("p"));
  m.def("frak_b", &frak_b, py::arg("space"), py::arg("p"));
  m.def("psi", &psi, py::arg("alpha"), py::arg("gamma"));
  m.def("c_alpha", &c_alpha, py::arg("alpha"));
  m.def("zeta", &zeta_s, py::arg("s"));

  m.def("trunc_coeff", &trunc_coeff, py::arg("t"));
  m.def("clip", &clip, py::arg("space"), py::arg("x"), py::arg("lambda_"));

  m.def("sample_mean", &sample_mean, py::arg("points"));
  m.def("geometric_median", &geometric_median, py::arg("points"),
        py::arg("space"), py::arg("tol") = 1e-10, py::arg("max_iter") = 10000);
  m.def("gmom_block_count", &gmom_block_count, py::arg("delta"));
  m.def("gmom", &gmom, py::arg("points"), py::arg("blocks"), py::arg("space"),
        py::arg("tol") = 1e-10, py::arg("max_iter") = 10000);

  py::class_<TruncatedMeanResult>(m, "TruncatedMeanResult")
      .def_readonly("estimate", &TruncatedMeanResult::estimate)
      .def_readonly("center", &TruncatedMeanResult::center)
      .def_readonly("n", &TruncatedMeanResult::n)
      .def_readonly("k", &TruncatedMeanResult::k);

  m.def(
      "truncated_mean",
      [](const std::vector<Vec>& xs, double lam, int64_t k,
         const std::string& center, double gmom_delta, const SpaceSpec* space) {
        EstimatorConfig ec;
        ec.lambda = lam;
        ec.k = k;
        ec.center_method = center_method_from_string(center);
        ec.gmom_delta = gmom_delta;
        const SpaceSpec sp =
            space ? *space
                  : SpaceSpec::euclidean(
                        xs.empty() ? 1 : static_cast<int>(xs.front().size()));
        return truncated_mean(xs, ec, sp);
      },
      py::arg("points"), py::arg("lambda_"), py::arg("k") = 0,
      py::arg("center") = "zero", py::arg("gmom_delta") = 1e-4,
      py::arg("space") = nullptr);

  py::class_<StreamingTruncatedMean>(m, "StreamingTruncatedMean")
      .def(py::init([](const SpaceSpec& space, double lam, int64_t k,
                       const std::string& center, double gmom_delta) {
             EstimatorConfig ec;
             ec.lambda = lam;
             ec.k = k;
             ec.center_method = center_method_from_string(center);
             ec.gmom_delta = gmom_delta;
             return StreamingTruncatedMean(space, ec);
           }),
           py::arg("space"), py::arg("lambda_"), py::arg("k") = 0,
           py::arg("center") = "zero", py::arg("gmom_delta") = 1e-4)
      .def("update", &StreamingTruncatedMean::update, py::arg("x"))
      .def("estimate", &StreamingTruncatedMean::estimate)
      .def("result", &StreamingTruncatedMean::result)
      .def_property_readonly("center_ready",
                             &StreamingTruncatedMean::center_ready)
      .def_property_readonly("seen", &StreamingTruncatedMean::seen);

  py::class_<RateFunction>(m, "RateFunction")
      .def_static("sample_mean", &RateFunction::sample_mean)
      .def_static("gmom", &RateFunction::gmom)
      .def_static("constant", &RateFunction::constant, py::arg("r"))
      .def_static("custom", &RateFunction::custom, py::arg("fn"))
      .def("__call__", &RateFunction::operator(), py::arg("delta"),
           py::arg("k"), py::arg("assm"), py::arg("space"));

  py::class_<BoundQuery>(m, "BoundQuery")
      .def(py::init([](int64_t n, int64_t k, double delta1, double delta2,
                       double rho, double lam) {
             BoundQuery q;
             q.n = n;
             q.k = k;
             q.delta1 = delta1;
             q.delta2 = delta2;
             q.rho = rho;
             q.lambda = lam;
             return q;
           }),
           py::arg("n") = 1, py::arg("k") = 0, py::arg("delta1") = 0.025,
           py::arg("delta2") = 0.025, py::arg("rho") = 0.0,
           py::arg("lambda_") = 0.0)
      .def_static("split", &BoundQuery::split, py::arg("n"), py::arg("k"),
                  py::arg("delta"))
      .def_readwrite("n", &BoundQuery::n)
      .def_readwrite("k", &BoundQuery::k)
      .def_readwrite("delta1", &BoundQuery::delta1)
      .def_readwrite("delta2", &BoundQuery::delta2)
      .def_readwrite("rho", &BoundQuery::rho)
      .def_readwrite("lambda_", &BoundQuery::lambda);

  m.def("r_sample_mean", &r_sample_mean, py::arg("delta"), py::arg("k"),
        py::arg("assm"), py::arg("space"));
  m.def("r_gmom", &r_gmom, py::arg("delta"), py::arg("k"), py::arg("assm"),
        py::arg("space"));
  m.def("line_crossing_width", &line_crossing_width, py::arg("query"),
        py::arg("assm"), py::arg("space"), py::arg("rate"));
  m.def("opt_lambda", &opt_lambda, py::arg("query"), py::arg("assm"),
        py::arg("space"), py::arg("rate"));
  m.def("optimized_width", &optimized_width, py::arg("query"), py::arg("assm"),
        py::arg("space"), py::arg("rate"));
  m.def("noncentral_width", &noncentral_width, py::arg("n"), py::arg("lambda_"),
        py::arg("delta"), py::arg("assm"), py::arg("space"));
  m.def(
      "noncentral_opt",
      [](int64_t n, double delta, const MomentAssumption& assm,
         const SpaceSpec& space) {
        const LambdaWidth lw = noncentral_opt(n, delta, assm, space);
        return py::make_tuple(lw.lambda, lw.width);
      },
      py::arg("n"), py::arg("delta"), py::arg("assm"), py::arg("space"));
  m.def(
      "stitched_width",
      [](int64_t n, double delta, const MomentAssumption& assm,
         const SpaceSpec& space, const RateFunction& rate, double s) {
        return stitched_width(n, delta, StitchConfig::make(s), assm, space,
                              rate);
      },
      py::arg("n"), py::arg("delta"), py::arg("assm"), py::arg("space"),
      py::arg("rate"), py::arg("s") = 2.0);
  m.def("eprocess_diag", &eprocess_diag, py::arg("xs"), py::arg("centers"),
        py::arg("lambdas"), py::arg("true_mu"), py::arg("assm"),
        py::arg("space"), py::arg("rho") = 0.0);

  m.def(
      "generate",
      [](const std::string& kind, int64_t n, uint64_t seed, uint64_t stream,
         double a, int64_t dim, const Vec& mean_offset, double mart_coeff,
         double sigma_min, double sigma_max) {
        return generate(
            make_gen(kind, a, dim, mean_offset, mart_coeff, sigma_min,
                     sigma_max),
            n, seed, stream);
      },
      py::arg("kind"), py::arg("n"), py::arg("seed"), py::arg("stream") = 0,
      py::arg("a") = 1.75, py::arg("dim") = 1, py::arg("mean_offset") = Vec{},
      py::arg("mart_coeff") = 1.0, py::arg("sigma_min") = 0.5,
      py::arg("sigma_max") = 1.5);
  m.def(
      "moment_v",
      [](const std::string& kind, double p, double a, int64_t dim,
         double sigma_max) {
        GeneratorSpec g;
        g.kind = gen_kind_from_string(kind);
        g.a = a;
        g.dim = dim;
        g.sigma_max = sigma_max;
        return moment_v(g, p);
      },
      py::arg("kind"), py::arg("p"), py::arg("a") = 1.75, py::arg("dim") = 1,
      py::arg("sigma_max") = 1.5);
}
