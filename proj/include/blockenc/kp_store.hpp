#pragma once

#include "blockenc/numerics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace blockenc {

// Binary-tree store of squared entries with signs, one tree per row plus a
// tree over the squared row norms. Indices are 0-based.
class KPTree {
public:
    KPTree(std::size_t rows, std::size_t cols);
    static KPTree fromMatrix(const Eigen::MatrixXd& a);
    static KPTree fromVector(const Eigen::VectorXd& v);

    // Returns the number of tree nodes written.
    std::size_t insert(std::size_t i, std::size_t j, double v);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double entry(std::size_t i, std::size_t j) const;
    double squaredLeaf(std::size_t i, std::size_t j) const;
    int sign(std::size_t i, std::size_t j) const;
    double rowNormSquared(std::size_t i) const;
    double frobeniusSquared() const;
    double topLeaf(std::size_t i) const;
    Eigen::MatrixXd matrix() const;

    // Checks that every internal node is the sum of its children.
    double maxNodeDefect() const;

    // Rotation-cascade amplitudes; the perturbation hook adds a random vector of
    // norm `bound` and renormalizes.
    StateVector rowState(std::size_t i) const;
    StateVector rowNormState() const;
    void setPerturbation(double bound, std::uint64_t seed);

    void saveSnapshot(const std::string& path) const;
    static KPTree loadSnapshot(const std::string& path);

private:
    StateVector cascade(const std::vector<double>& heap, std::size_t leaves, std::size_t count,
                        const std::vector<std::int8_t>* signs, std::uint64_t salt) const;
    void applyPerturbation(StateVector& s, std::uint64_t salt) const;

    std::size_t rows_, cols_, rowLeaves_, topLeaves_;
    std::vector<std::vector<double>> rowHeaps_;
    std::vector<std::vector<std::int8_t>> signs_;
    std::vector<double> topHeap_;
    double perturbBound_ = 0.0;
    std::uint64_t perturbSeed_ = 0;
};

struct PrepMaps {
    std::function<StateVector(std::size_t)> rowPrep;
    StateVector rowNormPrep;
};

PrepMaps prepMaps(const KPTree& tree);
StateVector vectorState(const KPTree& tree);

enum class MuMode { Frobenius, PNorm };

struct MuParams {
    MuMode mode = MuMode::Frobenius;
    double p = 0.5;
    double value = 0.0;
};

// A^(p) holds sign(a)|a|^p; the companion holds (|a|^(1-p))^T, with 0^0 read as 0.
std::pair<KPTree, KPTree> powerTrees(const Eigen::MatrixXd& a, double p);

MuParams muOf(const KPTree& tree);
MuParams muOf(const KPTree* pTree, const KPTree* companion, double p);

}  // namespace blockenc
