#pragma once

// Independent reference implementations used only by the tests. They share no
// numerical code with the library: linear algebra goes through Eigen, and the
// network / bound recursions are written out directly.

#include <yescert/bounds.hpp>
#include <yescert/matrix.hpp>
#include <yescert/mlp.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;

Mat to_eigen(const yescert::Matrix& m);
yescert::Matrix from_eigen(const Mat& m);

// Moore-Penrose pseudoinverse through Eigen's Jacobi SVD with the same
// relative cutoff convention (sigma <= rcond * sigma_max dropped).
Mat pinv(const Mat& a, double rcond);
double default_rcond(const Mat& a);

Mat relu(Mat m);
Mat activate(yescert::Activation a, Mat m);
Mat append_ones(const Mat& m);

// ||a - b||_F^2 / cols.
double normalized_error(const Mat& y, const Mat& approx);

// YES-0: Y_1 = X, Y_{k+1} = act_k(Y * pinv(Y_k~) * Y_k~).
std::vector<double> yes0_trace(const Mat& x, const Mat& y, const std::vector<yescert::Activation>& acts, bool bias);

// Error of one checkpoint set, walking layer by layer from scratch. Layer j
// targets outputs[t - 1] for the smallest checkpoint t > j, else Y.
double checkpoint_error(const Mat& x, const Mat& y, const std::vector<Mat>& outputs, const std::vector<std::size_t>& set,
                        const std::vector<yescert::Activation>& acts, bool bias);

struct BruteForce {
    std::vector<double> best;                          // per degree 0..K-1
    std::vector<std::vector<std::size_t>> argbest;     // lexicographically smallest on ties
};

// Every subset of {2, ..., K}, enumerated by bitmask and recomputed from scratch.
BruteForce all_checkpoint_sets(const Mat& x, const Mat& y, const std::vector<Mat>& outputs,
                               const std::vector<yescert::Activation>& acts, bool bias);

// Straight-line forward pass returning every layer output (input first).
std::vector<Mat> forward(const yescert::MlpParams& params, const Mat& x);
double loss(const yescert::MlpParams& params, const Mat& x, const Mat& y);

// Smallest |pre-activation| over all ReLU layers; finite differences are only
// trusted when this is well away from zero.
double min_relu_margin(const yescert::MlpParams& params, const Mat& x);

// Central differences of the loss w.r.t. every parameter (weights row-major
// per layer, then bias), flattened in that order.
std::vector<double> finite_difference_gradient(yescert::MlpParams params, const Mat& x, const Mat& y, double step);
std::vector<double> flatten(const yescert::MlpParams& params);

// Random helpers.
Mat gaussian(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0);
Mat low_rank(std::size_t rows, std::size_t cols, std::size_t rank, std::mt19937_64& rng);

} // namespace oracle
