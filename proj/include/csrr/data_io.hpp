#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "csrr/matrix.hpp"
#include "csrr/metrics.hpp"
#include "csrr/rng.hpp"

namespace csrr {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RatingFormat { Tab, DoubleColon };

struct Rating {
    Index user;   // dense index
    Index item;   // dense index
    double value;
    int64_t timestamp;
};

struct RatingDataset {
    std::vector<Rating> ratings;
    Index n_users = 0;
    Index n_items = 0;
    std::vector<int64_t> user_ids;  // dense index -> external id
    std::vector<int64_t> item_ids;
    Index duplicates_dropped = 0;   // duplicate (user,item) pairs, last wins
};

namespace detail {

inline bool split_line(const std::string& line, RatingFormat fmt,
                       std::vector<std::string>& out) {
    out.clear();
    if (fmt == RatingFormat::Tab) {
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, '\t')) out.push_back(field);
    } else {
        size_t pos = 0;
        while (true) {
            size_t next = line.find("::", pos);
            if (next == std::string::npos) {
                out.push_back(line.substr(pos));
                break;
            }
            out.push_back(line.substr(pos, next - pos));
            pos = next + 2;
        }
    }
    return out.size() == 4;
}

}  // namespace detail

/// Parse a MovieLens-style ratings file. External ids are remapped to dense
/// contiguous indices; duplicate (user, item) pairs keep the last occurrence.
inline RatingDataset parse_ratings(const std::string& path, RatingFormat fmt) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open ratings file: " + path);

    RatingDataset ds;
    std::map<int64_t, Index> user_map, item_map;
    std::map<std::pair<Index, Index>, size_t> seen;  // (user,item) -> position
    std::vector<std::string> fields;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!detail::split_line(line, fmt, fields))
            throw ParseError("malformed line " + std::to_string(line_no) + " in " + path);
        Rating r;
        try {
            int64_t uid = std::stoll(fields[0]);
            int64_t iid = std::stoll(fields[1]);
            r.value = std::stod(fields[2]);
            r.timestamp = std::stoll(fields[3]);
            auto [uit, unew] = user_map.try_emplace(uid, static_cast<Index>(user_map.size()));
            if (unew) ds.user_ids.push_back(uid);
            auto [iit, inew] = item_map.try_emplace(iid, static_cast<Index>(item_map.size()));
            if (inew) ds.item_ids.push_back(iid);
            r.user = uit->second;
            r.item = iit->second;
        } catch (const std::exception&) {
            throw ParseError("malformed line " + std::to_string(line_no) + " in " + path);
        }
        auto key = std::make_pair(r.user, r.item);
        auto it = seen.find(key);
        if (it != seen.end()) {
            ds.ratings[it->second] = r;  // last occurrence wins
            ++ds.duplicates_dropped;
        } else {
            seen.emplace(key, ds.ratings.size());
            ds.ratings.push_back(r);
        }
    }
    if (ds.ratings.empty()) throw ParseError("empty dataset: " + path);
    ds.n_users = static_cast<Index>(user_map.size());
    ds.n_items = static_cast<Index>(item_map.size());
    return ds;
}

/// Ratings strictly larger than `threshold` become positive feedback.
/// Matrix layout is items x users.
inline ObservationMatrix binarize(const RatingDataset& ds, double threshold) {
    ObservationMatrix a(ds.n_items, ds.n_users);
    for (const Rating& r : ds.ratings)
        if (r.value > threshold) a.add_positive(r.item, r.user);
    return a;
}

struct Split {
    ObservationMatrix train;
    std::vector<ItemSet> test;  // per-user held-out positive items
    uint64_t seed = 0;
    double fraction = 0.8;
};

/// Per-user random 80/20 partition of positives. |train| = round(fraction*k)
/// half-up; users with fewer than 2 positives keep everything in train.
inline Split split_per_user(const ObservationMatrix& a, double fraction, uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw std::invalid_argument("split fraction must be in (0,1)");
    std::vector<std::vector<Index>> per_user(static_cast<size_t>(a.cols()));
    for (auto [i, j] : a.positives()) per_user[static_cast<size_t>(j)].push_back(i);

    Split s{ObservationMatrix(a.rows(), a.cols()), {}, seed, fraction};
    s.test.resize(static_cast<size_t>(a.cols()));
    SplitMix64 rng(seed);
    for (Index user = 0; user < a.cols(); ++user) {
        auto& items = per_user[static_cast<size_t>(user)];
        size_t k = items.size();
        if (k == 0) continue;
        if (k < 2) {
            for (Index i : items) s.train.add_positive(i, user);
            continue;
        }
        rng.shuffle(items);
        size_t n_train = static_cast<size_t>(std::floor(fraction * static_cast<double>(k) + 0.5));
        for (size_t idx = 0; idx < k; ++idx) {
            if (idx < n_train)
                s.train.add_positive(items[idx], user);
            else
                s.test[static_cast<size_t>(user)].insert(items[idx]);
        }
    }
    return s;
}

/// Items ordered by descending training popularity, ties by ascending index.
inline std::vector<Index> pop_rank(const ObservationMatrix& a) {
    std::vector<Index> counts(static_cast<size_t>(a.rows()), 0);
    for (auto [i, j] : a.positives()) ++counts[static_cast<size_t>(i)];
    std::vector<Index> order(static_cast<size_t>(a.rows()));
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
        Index cx = counts[static_cast<size_t>(x)], cy = counts[static_cast<size_t>(y)];
        if (cx != cy) return cx > cy;
        return x < y;
    });
    return order;
}

/// Score matrix for the PopRank baseline: every user gets the same item
/// ordering (higher score = more popular); training positives are excluded
/// later by the ranking protocol.
inline Matrix pop_rank_scores(const ObservationMatrix& a) {
    std::vector<Index> order = pop_rank(a);
    Matrix scores(a.rows(), a.cols());
    for (size_t rank = 0; rank < order.size(); ++rank) {
        double s = static_cast<double>(order.size() - rank);
        scores.row(order[rank]).setConstant(s);
    }
    return scores;
}

/// Audit manifest: seed, fraction, and the held-out item ids per user.
inline void write_split_manifest(const Split& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write split manifest: " + path);
    out << "seed " << s.seed << "\n";
    out << "fraction " << s.fraction << "\n";
    for (size_t user = 0; user < s.test.size(); ++user) {
        if (s.test[user].empty()) continue;
        out << "user " << user << " test";
        for (Index item : s.test[user]) out << ' ' << item;
        out << "\n";
    }
}

}  // namespace csrr
