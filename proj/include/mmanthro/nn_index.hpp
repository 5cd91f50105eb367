#pragma once

#include <vector>

#include "mmanthro/types.hpp"

namespace mmanthro {

struct NearestNeighborResult {
    int index = -1;
    Vec3 point = Vec3::Zero();
    double squared_distance = 0.0;
};

/// Exact nearest-neighbor kd-tree over a fixed point set. Queries return the
/// true argmin of the squared distance; ties go to the lowest point index.
/// Immutable after construction, safe for concurrent queries.
class NearestNeighborIndex {
public:
    explicit NearestNeighborIndex(std::vector<Vec3> points);

    NearestNeighborResult query(const Vec3& q) const;

    std::size_t size() const { return points_.size(); }
    const std::vector<Vec3>& points() const { return points_; }

private:
    struct Node {
        int axis = -1;           // -1 marks a leaf
        double split = 0.0;
        int left = -1, right = -1;
        int begin = 0, end = 0;  // leaf payload range in order_
    };

    int build(int begin, int end);
    void search(int node, const Vec3& q, NearestNeighborResult& best) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;

    static constexpr int kLeafSize = 8;
};

}  // namespace mmanthro
