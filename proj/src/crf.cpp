#include "emrseg/crf.hpp"

#include <cmath>

#include "emrseg/errors.hpp"

namespace emrseg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const double* x, int n) {
    double m = kNegInf;
    for (int i = 0; i < n; ++i) m = std::max(m, x[i]);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(x[i] - m);
    return m + std::log(s);
}

}  // namespace

CrfTable CrfTable::zeros(int num_labels) {
    CrfTable t;
    t.num_labels = num_labels;
    t.scores.assign(static_cast<std::size_t>(t.side() * t.side()), 0.0);
    for (int from = 0; from < t.side(); ++from) {
        for (int to = 0; to < t.side(); ++to) {
            if (!t.valid(from, to)) t.at(from, to) = kNegInf;
        }
    }
    return t;
}

double crf_log_partition(const double* emissions, int length, const CrfTable& t) {
    if (length < 1) throw Error("crf: empty sequence");
    const int y = t.num_labels;
    std::vector<double> alpha(static_cast<std::size_t>(y));
    std::vector<double> next(static_cast<std::size_t>(y));
    std::vector<double> terms(static_cast<std::size_t>(y));

    for (int j = 0; j < y; ++j) alpha[j] = t.at(t.start(), j) + emissions[j];
    for (int i = 1; i < length; ++i) {
        const double* e = emissions + static_cast<std::ptrdiff_t>(i) * y;
        for (int j = 0; j < y; ++j) {
            for (int k = 0; k < y; ++k) terms[k] = alpha[k] + t.at(k, j);
            next[j] = log_sum_exp(terms.data(), y) + e[j];
        }
        alpha.swap(next);
    }
    for (int j = 0; j < y; ++j) terms[j] = alpha[j] + t.at(j, t.stop());
    return log_sum_exp(terms.data(), y);
}

double crf_score(const double* emissions, int length, const CrfTable& t,
                 const int* path) {
    if (length < 1) throw Error("crf: empty sequence");
    for (int i = 0; i < length; ++i) {
        if (path[i] < 0 || path[i] >= t.num_labels) throw Error("crf: label out of range");
    }
    double s = t.at(t.start(), path[0]) + emissions[path[0]];
    for (int i = 1; i < length; ++i) {
        s += t.at(path[i - 1], path[i]) +
             emissions[static_cast<std::ptrdiff_t>(i) * t.num_labels + path[i]];
    }
    s += t.at(path[length - 1], t.stop());
    return s;
}

double crf_nll(const double* emissions, int length, const CrfTable& t,
               const int* gold) {
    return crf_log_partition(emissions, length, t) -
           crf_score(emissions, length, t, gold);
}

double crf_nll_grad(const double* emissions, int length, const CrfTable& t,
                    const int* gold, double* d_emissions, double* d_transitions) {
    if (length < 1) throw Error("crf: empty sequence");
    const int y = t.num_labels;
    const int side = t.side();
    const auto idx = [y](int i, int j) {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(y) +
               static_cast<std::size_t>(j);
    };

    // forward
    std::vector<double> alpha(static_cast<std::size_t>(length) * y);
    std::vector<double> terms(static_cast<std::size_t>(y));
    for (int j = 0; j < y; ++j) alpha[idx(0, j)] = t.at(t.start(), j) + emissions[idx(0, j)];
    for (int i = 1; i < length; ++i) {
        for (int j = 0; j < y; ++j) {
            for (int k = 0; k < y; ++k) terms[k] = alpha[idx(i - 1, k)] + t.at(k, j);
            alpha[idx(i, j)] = log_sum_exp(terms.data(), y) + emissions[idx(i, j)];
        }
    }
    for (int j = 0; j < y; ++j) terms[j] = alpha[idx(length - 1, j)] + t.at(j, t.stop());
    const double log_z = log_sum_exp(terms.data(), y);

    // backward: beta[i][j] = log sum over completions after position i
    std::vector<double> beta(static_cast<std::size_t>(length) * y);
    for (int j = 0; j < y; ++j) beta[idx(length - 1, j)] = t.at(j, t.stop());
    for (int i = length - 2; i >= 0; --i) {
        for (int j = 0; j < y; ++j) {
            for (int k = 0; k < y; ++k) {
                terms[k] = t.at(j, k) + emissions[idx(i + 1, k)] + beta[idx(i + 1, k)];
            }
            beta[idx(i, j)] = log_sum_exp(terms.data(), y);
        }
    }

    // unary marginals -> emission grads; also START/STOP transition grads
    for (int i = 0; i < length; ++i) {
        for (int j = 0; j < y; ++j) {
            double p = std::exp(alpha[idx(i, j)] + beta[idx(i, j)] - log_z);
            d_emissions[idx(i, j)] += p - (gold[i] == j ? 1.0 : 0.0);
        }
    }
    for (int j = 0; j < y; ++j) {
        double p1 = std::exp(alpha[idx(0, j)] + beta[idx(0, j)] - log_z);
        d_transitions[static_cast<std::size_t>(t.start() * side + j)] +=
            p1 - (gold[0] == j ? 1.0 : 0.0);
        double pl = std::exp(alpha[idx(length - 1, j)] + beta[idx(length - 1, j)] - log_z);
        d_transitions[static_cast<std::size_t>(j * side + t.stop())] +=
            pl - (gold[length - 1] == j ? 1.0 : 0.0);
    }

    // pairwise marginals -> interior transition grads
    for (int i = 0; i + 1 < length; ++i) {
        for (int a = 0; a < y; ++a) {
            for (int b = 0; b < y; ++b) {
                double p = std::exp(alpha[idx(i, a)] + t.at(a, b) +
                                    emissions[idx(i + 1, b)] + beta[idx(i + 1, b)] - log_z);
                d_transitions[static_cast<std::size_t>(a * side + b)] += p;
            }
        }
        d_transitions[static_cast<std::size_t>(gold[i] * side + gold[i + 1])] -= 1.0;
    }

    return log_z - crf_score(emissions, length, t, gold);
}

std::pair<std::vector<int>, double> viterbi_decode(const double* emissions,
                                                   int length, const CrfTable& t) {
    if (length < 1) throw Error("crf: empty sequence");
    const int y = t.num_labels;
    std::vector<double> best(static_cast<std::size_t>(length) * y);
    std::vector<int> back(static_cast<std::size_t>(length) * y, -1);
    const auto idx = [y](int i, int j) {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(y) +
               static_cast<std::size_t>(j);
    };

    for (int j = 0; j < y; ++j) best[idx(0, j)] = t.at(t.start(), j) + emissions[idx(0, j)];
    for (int i = 1; i < length; ++i) {
        for (int j = 0; j < y; ++j) {
            double bs = -std::numeric_limits<double>::infinity();
            int bk = 0;
            for (int k = 0; k < y; ++k) {
                double s = best[idx(i - 1, k)] + t.at(k, j);
                if (s > bs) {  // strict: ties keep the lower label id
                    bs = s;
                    bk = k;
                }
            }
            best[idx(i, j)] = bs + emissions[idx(i, j)];
            back[idx(i, j)] = bk;
        }
    }

    double best_final = -std::numeric_limits<double>::infinity();
    int best_label = 0;
    for (int j = 0; j < y; ++j) {
        double s = best[idx(length - 1, j)] + t.at(j, t.stop());
        if (s > best_final) {
            best_final = s;
            best_label = j;
        }
    }

    std::vector<int> path(static_cast<std::size_t>(length));
    path[static_cast<std::size_t>(length - 1)] = best_label;
    for (int i = length - 1; i > 0; --i) {
        path[static_cast<std::size_t>(i - 1)] =
            back[idx(i, path[static_cast<std::size_t>(i)])];
    }
    return {std::move(path), best_final};
}

}  // namespace emrseg
