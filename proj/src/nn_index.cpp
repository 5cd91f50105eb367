#include "mmanthro/nn_index.hpp"

#include <algorithm>
#include <numeric>

namespace mmanthro {

NearestNeighborIndex::NearestNeighborIndex(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) throw NumericError("nearest-neighbor index over an empty point set");
    for (std::size_t i = 0; i < points_.size(); ++i)
        if (!points_[i].allFinite())
            throw NumericError("non-finite point " + std::to_string(i) + " in NN index");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(points_.size()));
}

int NearestNeighborIndex::build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= kLeafSize) {
        // Leaves scan in ascending original index so distance ties resolve low.
        std::sort(order_.begin() + begin, order_.begin() + end);
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }
    Vec3 lo = points_[order_[begin]], hi = lo;
    for (int i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[order_[mid]][axis];
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void NearestNeighborIndex::search(int node, const Vec3& q, NearestNeighborResult& best) const {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
        for (int i = n.begin; i < n.end; ++i) {
            const int idx = order_[i];
            const double d2 = (points_[idx] - q).squaredNorm();
            if (d2 < best.squared_distance ||
                (d2 == best.squared_distance && idx < best.index)) {
                best.index = idx;
                best.squared_distance = d2;
            }
        }
        return;
    }
    const double diff = q[n.axis] - n.split;
    const int near = diff < 0.0 ? n.left : n.right;
    const int far = diff < 0.0 ? n.right : n.left;
    search(near, q, best);
    // <= keeps equal-distance candidates reachable for the low-index tie rule.
    if (diff * diff <= best.squared_distance) search(far, q, best);
}

NearestNeighborResult NearestNeighborIndex::query(const Vec3& q) const {
    NearestNeighborResult best;
    best.squared_distance = std::numeric_limits<double>::infinity();
    best.index = static_cast<int>(points_.size());
    search(root_, q, best);
    best.point = points_[best.index];
    return best;
}

}  // namespace mmanthro
