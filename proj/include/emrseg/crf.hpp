#pragma once

#include <limits>
#include <utility>
#include <vector>

namespace emrseg {

// Linear-chain CRF transition table over num_labels real states plus the
// virtual START and STOP states. Entries into START and out of STOP are
// fixed at -inf and never read by the recursions. All CRF arithmetic is
// double precision.
struct CrfTable {
    int num_labels = 0;
    std::vector<double> scores;  // (num_labels + 2)^2 row-major, [from][to]

    int side() const { return num_labels + 2; }
    int start() const { return num_labels; }
    int stop() const { return num_labels + 1; }

    double& at(int from, int to) { return scores[static_cast<std::size_t>(from * side() + to)]; }
    double at(int from, int to) const {
        return scores[static_cast<std::size_t>(from * side() + to)];
    }

    // Valid transitions 0, forbidden ones -inf.
    static CrfTable zeros(int num_labels);

    // True for entries the recursions can reach (START->y, y->y', y->STOP).
    bool valid(int from, int to) const {
        return from != stop() && to != start() &&
               !(from == start() && to == stop());
    }
};

// emissions: length x num_labels, row-major.
// log Z over all label paths, by the forward recursion in log space.
// Throws Error for length == 0.
double crf_log_partition(const double* emissions, int length, const CrfTable& t);

// score(path) = T[START,y1] + sum_t e[t,yt] + sum_t T[y_{t-1},y_t] + T[yL,STOP]
double crf_score(const double* emissions, int length, const CrfTable& t,
                 const int* path);

// logZ - score(gold) >= 0.
double crf_nll(const double* emissions, int length, const CrfTable& t,
               const int* gold);

// Adds d nll / d emissions into d_emissions (length x num_labels) and
// d nll / d T into d_transitions (same layout as t.scores); returns the nll.
// Computed by forward-backward marginals.
double crf_nll_grad(const double* emissions, int length, const CrfTable& t,
                    const int* gold, double* d_emissions, double* d_transitions);

// Argmax path and its score; ties break toward the lower label id.
std::pair<std::vector<int>, double> viterbi_decode(const double* emissions,
                                                   int length, const CrfTable& t);

}  // namespace emrseg
