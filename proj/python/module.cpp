#include "blockenc/hamsim.hpp"
#include "blockenc/harness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace blockenc;

namespace {

py::dict ledgerDict(const CostLedger& l) {
    py::dict q;
    for (const auto& [k, v] : l.queries) q[py::str(k)] = v;
    py::dict d;
    d["queries"] = q;
    d["gates"] = l.gates;
    d["total"] = l.totalQueries();
    return d;
}

py::dict solveDict(const StateVector& state, const CostLedger& l) {
    py::dict d;
    d["state"] = state;
    d["ledger"] = ledgerDict(l);
    return d;
}

WLSRoute wlsRoute(const std::string& r) {
    if (r == "kp-a") return WLSRoute::KPOnA;
    if (r == "kp-xw") return WLSRoute::KPOnXWeights;
    if (r == "sparse") return WLSRoute::Sparse;
    fail(ErrorKind::Config, "unknown wls route '" + r + "'");
}

GLSRoute glsRoute(const std::string& r) {
    if (r == "omega-inv-sqrt") return GLSRoute::OmegaInverseSqrt;
    if (r == "omega") return GLSRoute::Omega;
    if (r == "kp") return GLSRoute::KP;
    if (r == "sparse") return GLSRoute::Sparse;
    fail(ErrorKind::Config, "unknown gls route '" + r + "'");
}

py::dict regressionDict(const RegressionResult& r) {
    py::dict d = solveDict(r.state, r.ledger);
    d["gamma_lower"] = r.gammaLower;
    d["overlap"] = r.overlap;
    d["kappa"] = r.kappa;
    return d;
}

}  // namespace

PYBIND11_MODULE(_blockenc, m) {
    m.doc() = "Block-encoding simulator";

    static PyObject* errType = PyErr_NewException("blockenc._blockenc.BlockencError", PyExc_RuntimeError, nullptr);
    m.attr("BlockencError") = py::reinterpret_borrow<py::object>(errType);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            auto inst = py::reinterpret_steal<py::object>(PyObject_CallFunction(errType, "s", e.what()));
            inst.attr("kind") = errorKindName(e.kind());
            inst.attr("contract") = e.isContract();
            PyErr_SetObject(errType, inst.ptr());
        }
    });

    m.def("max_qubits", &maxQubits);
    m.def("spectral_norm", &spectralNorm);
    m.def("pseudoinverse", &pseudoinverse, py::arg("a"), py::arg("tol") = 1e-10);
    m.def("fidelity", &fidelity);

    py::class_<BlockEncoding>(m, "BlockEncoding")
        .def_readonly("unitary", &BlockEncoding::unitary)
        .def_readonly("alpha", &BlockEncoding::alpha)
        .def_readonly("ancillas", &BlockEncoding::ancillas)
        .def_readonly("epsilon", &BlockEncoding::epsilon)
        .def_readonly("system_dim", &BlockEncoding::systemDim)
        .def("block", &BlockEncoding::block)
        .def("extracted", &BlockEncoding::extracted)
        .def("measured_error", &BlockEncoding::measuredError)
        .def_property_readonly("ledger", [](const BlockEncoding& b) { return ledgerDict(b.ledger); })
        .def("__repr__", &BlockEncoding::descriptorJson);

    m.def("exact_encode", &exactEncode, py::arg("a"), py::arg("alpha"));
    m.def("product", &product);
    m.def("complement", &complement);
    m.def("amplify", &amplify, py::arg("u"), py::arg("gamma"));
    m.def("lcu", &lcu, py::arg("encodings"), py::arg("coeffs"));
    m.def("block_ham_sim", &blockHamSim, py::arg("u"), py::arg("t"), py::arg("eps"));
    m.def(
        "negative_power",
        [](const BlockEncoding& u, double c, double kappa, double eps, bool spectral) {
            return negativePower(u, c, kappa, eps, spectral ? PowerPath::Spectral : PowerPath::Series);
        },
        py::arg("u"), py::arg("c"), py::arg("kappa"), py::arg("eps"), py::arg("spectral") = false);
    m.def(
        "positive_power",
        [](const BlockEncoding& u, double c, double kappa, double eps, bool spectral) {
            return positivePower(u, c, kappa, eps, spectral ? PowerPath::Spectral : PowerPath::Series);
        },
        py::arg("u"), py::arg("c"), py::arg("kappa"), py::arg("eps"), py::arg("spectral") = false);

    py::class_<KPTree>(m, "KPTree")
        .def(py::init<std::size_t, std::size_t>())
        .def_static("from_matrix", &KPTree::fromMatrix)
        .def("insert", &KPTree::insert)
        .def("entry", &KPTree::entry)
        .def("matrix", &KPTree::matrix)
        .def("row_state", &KPTree::rowState)
        .def("row_norm_state", &KPTree::rowNormState)
        .def_property_readonly("rows", &KPTree::rows)
        .def_property_readonly("cols", &KPTree::cols);

    m.def(
        "from_kp",
        [](const Eigen::MatrixXd& a, const std::string& mode, double p, double eps) {
            if (mode == "frobenius") {
                KPTree t = KPTree::fromMatrix(a);
                return fromKP({&t, nullptr, nullptr}, muOf(t), eps);
            }
            if (mode != "p") fail(ErrorKind::Config, "mode must be frobenius or p");
            auto [pw, comp] = powerTrees(a, p);
            return fromKP({nullptr, &pw, &comp}, muOf(&pw, &comp, p), eps);
        },
        py::arg("a"), py::arg("mode") = "frobenius", py::arg("p") = 0.5, py::arg("eps") = 0.0);

    m.def(
        "qls_solve",
        [](const BlockEncoding& u, const StateVector& b, double kappa, double eps) {
            QLSResult r = qlsSolve(u, b, makeQLSConfig(kappa, eps));
            py::dict d = solveDict(r.state, r.ledger);
            d["wrapped"] = r.wrapped;
            return d;
        },
        py::arg("u"), py::arg("b"), py::arg("kappa"), py::arg("eps"));
    m.def(
        "naive_inverse_state",
        [](const BlockEncoding& u, const StateVector& b, double kappa, double eps) {
            AppliedState a = naiveInverseState(u, b, kappa, eps);
            return solveDict(a.state, a.ledger);
        },
        py::arg("u"), py::arg("b"), py::arg("kappa"), py::arg("eps"));
    m.def(
        "qls_norm_estimate",
        [](const BlockEncoding& u, const StateVector& b, double kappa, double eps, double delta, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            NormEstimate n = qlsNormEstimate(u, b, kappa, 1.0, eps, delta, rng);
            return py::make_tuple(n.gamma, n.reference);
        },
        py::arg("u"), py::arg("b"), py::arg("kappa"), py::arg("eps"), py::arg("delta") = 0.1, py::arg("seed") = 0);

    m.def(
        "wls_solve",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double kappa, double eta,
           const std::string& route, double eps) {
            RegressionProblem p;
            p.X = X;
            p.y = y;
            p.weights = w;
            p.kappaA = kappa;
            p.eta = eta;
            return regressionDict(wlsSolve(p, wlsRoute(route), eps));
        },
        py::arg("X"), py::arg("y"), py::arg("weights"), py::arg("kappa"), py::arg("eta"), py::arg("route") = "kp-a",
        py::arg("eps") = 1e-3);
    m.def(
        "gls_solve",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::MatrixXd& omega, double kappa,
           double kappaOmega, double eta, const std::string& route, double eps) {
            RegressionProblem p;
            p.X = X;
            p.y = y;
            p.omega = omega;
            p.kappaA = kappa;
            p.kappaOmega = kappaOmega;
            p.eta = eta;
            return regressionDict(glsSolve(p, glsRoute(route), eps));
        },
        py::arg("X"), py::arg("y"), py::arg("omega"), py::arg("kappa"), py::arg("kappa_omega"), py::arg("eta"),
        py::arg("route") = "omega-inv-sqrt", py::arg("eps") = 1e-3);

    m.def(
        "effective_resistance",
        [](const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges, std::size_t s, std::size_t t,
           double eps, double delta, std::uint64_t seed, const std::string& route) {
            std::vector<Edge> es;
            for (const auto& [u, v, w] : edges) es.push_back({u, v, w});
            std::mt19937_64 rng(seed);
            NetworkRoute r = NetworkRoute::Dense;
            if (route == "sparse") {
                r = NetworkRoute::Sparse;
            } else if (route != "dense") {
                fail(ErrorKind::Config, "unknown network route '" + route + "'");
            }
            NetworkEstimate e = effectiveResistance(buildNetwork(es), s, t, eps, delta, rng, r);
            py::dict d;
            d["estimate"] = e.estimate;
            d["reference"] = e.reference;
            d["kappa"] = e.kappa;
            d["ledger"] = ledgerDict(e.ledger);
            return d;
        },
        py::arg("edges"), py::arg("s"), py::arg("t"), py::arg("eps") = 0.1, py::arg("delta") = 1.0 / 3.0,
        py::arg("seed") = 0, py::arg("route") = "dense");

    m.def("_run_experiment", [](const std::string& config) {
        return runExperiment(configFromJson(nlohmann::json::parse(config))).json();
    });
    m.def("_scaling_sweep", [](const std::string& config) {
        SweepResult r = scalingSweep(sweepFromJson(nlohmann::json::parse(config)));
        return py::make_tuple(r.csv(), r.summaryJson());
    });
}
