#pragma once

#include "blockenc/kp_store.hpp"
#include "blockenc/numerics.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace blockenc {

struct CostLedger {
    std::map<std::string, double> queries;
    double gates = 0.0;

    double totalQueries() const;
    CostLedger scaled(double factor) const;
    CostLedger& operator+=(const CostLedger& other);
    friend CostLedger operator+(CostLedger a, const CostLedger& b) { return a += b; }
    static CostLedger single(const std::string& oracle, double count = 1.0);
};

// Ancillas are the most significant qubits: basis index = anc * systemDim + sys.
struct BlockEncoding {
    ComplexMatrix unitary;
    double alpha = 1.0;
    int ancillas = 0;
    double epsilon = 0.0;
    std::size_t systemDim = 0;
    CostLedger ledger;
    std::optional<ComplexMatrix> target;

    ComplexMatrix block() const;
    ComplexMatrix extracted() const { return alpha * block(); }
    // Spectral distance between the attached target and alpha * block.
    double measuredError() const;
    void validate() const;
    std::string descriptorJson() const;
};

// Dilates `blk` on one ancilla and pads with idle ancillas up to `ancillas`.
BlockEncoding encodeBlock(const ComplexMatrix& blk, double alpha, int ancillas, double epsilon,
                          CostLedger ledger);

ComplexMatrix padSquare(const ComplexMatrix& a);

BlockEncoding exactEncode(const ComplexMatrix& a, double alpha);
BlockEncoding product(const BlockEncoding& u, const BlockEncoding& v);
BlockEncoding amplify(const BlockEncoding& u, double gamma);
BlockEncoding preamplifiedProduct(const BlockEncoding& u, const BlockEncoding& v, double gamma);
BlockEncoding complement(const BlockEncoding& u);
BlockEncoding lcu(const std::vector<BlockEncoding>& encodings, const std::vector<double>& coeffs);

// Product of (1, a, eps) encodings sharing one ancilla register.
BlockEncoding sharedAncillaProduct(const std::vector<BlockEncoding>& factors);

// Sparse states over abstract labels; label sets are mapped injectively onto basis indices.
using LabelState = std::map<std::uint64_t, cplx>;

// Builds U_R^dagger U_L with U_R|0,i> = psi_i and U_L|0,i> = phi_i, so the block is <psi_i|phi_j>.
ComplexMatrix statePairUnitary(const std::vector<LabelState>& psi, const std::vector<LabelState>& phi,
                               int ancillas);

struct SparseOracles {
    std::size_t rows = 0;
    std::size_t cols = 0;
    // k-th nonzero position of row i / column j, or -1 once exhausted.
    std::function<long(std::size_t, std::size_t)> row;
    std::function<long(std::size_t, std::size_t)> col;
    std::function<cplx(std::size_t, std::size_t)> entry;
};

BlockEncoding fromSparseAccess(const SparseOracles& oracles, std::size_t sR, std::size_t sC,
                               double eps);
SparseOracles denseOracles(const ComplexMatrix& a);

struct KPInputs {
    const KPTree* matrix = nullptr;
    const KPTree* power = nullptr;
    const KPTree* companion = nullptr;
};

BlockEncoding fromKP(const KPInputs& trees, const MuParams& mu, double eps);

struct KPStates {
    std::vector<LabelState> psi;
    std::vector<LabelState> phi;
    int ancillas = 0;
};
KPStates kpStates(const KPInputs& trees, const MuParams& mu);

struct AppliedState {
    StateVector state;
    CostLedger ledger;
    double successAmplitude = 0.0;
};

AppliedState applyToState(const BlockEncoding& u, const StateVector& b, double gammaLower, double eps);

}  // namespace blockenc
