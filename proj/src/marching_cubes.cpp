#include "implantgen/marching_cubes.hpp"

#include <array>
#include <climits>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace implantgen {

namespace {

// Cube corners are numbered by bits: corner i sits at ((i>>0)&1, (i>>1)&1, (i>>2)&1).
// Cube edges 0..11: ids 4*axis + (p + 2*q) where (p,q) are the two non-axis
// coordinates in increasing axis order.

int edge_id(int axis, int p, int q) { return 4 * axis + p + 2 * q; }

struct Segment {
    int from_edge;
    int to_edge;
};

// One cube face: perpendicular axis n at side s, with a 2D basis (eu, ev)
// chosen so that eu x ev points out of the cube.
struct Face {
    int n, s, eu, ev;
};

constexpr std::array<Face, 6> make_faces() {
    // (u,v,n) even permutations of (0,1,2) have cross(u,v) = +n.
    return {{{0, 0, 2, 1},
             {0, 1, 1, 2},
             {1, 0, 0, 2},
             {1, 1, 2, 0},
             {2, 0, 1, 0},
             {2, 1, 0, 1}}};
}

int face_corner(const Face& f, int a, int b) {
    int c[3];
    c[f.n] = f.s;
    c[f.eu] = a;
    c[f.ev] = b;
    return c[0] | (c[1] << 1) | (c[2] << 2);
}

// Cube edge id of the face edge running along `axis` with the face's other
// local coordinate fixed.
int face_edge_id(const Face& f, int axis, int fixed_other) {
    int coord[3];
    coord[f.n] = f.s;
    const int other_axis = (axis == f.eu) ? f.ev : f.eu;
    coord[other_axis] = fixed_other;
    coord[axis] = 0;  // unused below
    // Non-axis coordinates in increasing axis order:
    int nonaxis[2], k = 0;
    for (int a = 0; a < 3; ++a)
        if (a != axis) nonaxis[k++] = coord[a];
    return edge_id(axis, nonaxis[0], nonaxis[1]);
}

// Directed iso-segments of one face, oriented so that the inside region is
// on the right when the face is viewed from outside the cube. That induces
// outward triangle orientation on the assembled loops. Orientation comes
// from the exact side of a reference corner relative to the segment.
void face_segments(const Face& f, int config, std::vector<Segment>& out) {
    std::array<std::array<int, 2>, 2> w;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) w[a][b] = (config >> face_corner(f, a, b)) & 1;

    struct LocalEdge {
        int cube_edge;
        double mx, my;  // midpoint in face-local coordinates
    };
    // Face edges: bottom, top (along eu), left, right (along ev).
    std::vector<LocalEdge> active;
    auto consider = [&](int axis_local, int fixed, double mx, double my, int w0, int w1) {
        if (w0 != w1) active.push_back({face_edge_id(f, axis_local, fixed), mx, my});
    };
    consider(f.eu, 0, 0.5, 0.0, w[0][0], w[1][0]);  // bottom: b = 0
    consider(f.eu, 1, 0.5, 1.0, w[0][1], w[1][1]);  // top: b = 1
    consider(f.ev, 0, 0.0, 0.5, w[0][0], w[0][1]);  // left: a = 0
    consider(f.ev, 1, 1.0, 0.5, w[1][0], w[1][1]);  // right: a = 1

    // Emits ea->eb or its reverse so that the reference corner ends up on
    // the right when it is inside, on the left when it is outside.
    auto emit = [&](const LocalEdge& ea, const LocalEdge& eb, int ca, int cb, bool ref_inside) {
        const double dx = eb.mx - ea.mx, dy = eb.my - ea.my;
        const double cross = dx * (cb - ea.my) - dy * (ca - ea.mx);
        const bool ref_left = cross > 0.0;
        if (ref_left == ref_inside)
            out.push_back({eb.cube_edge, ea.cube_edge});
        else
            out.push_back({ea.cube_edge, eb.cube_edge});
    };

    const int inside_count = w[0][0] + w[1][0] + w[0][1] + w[1][1];
    if (inside_count == 0 || inside_count == 4) return;

    auto adjacent = [&](int a, int b) -> std::pair<const LocalEdge*, const LocalEdge*> {
        // The face edges touching corner (a, b) have midpoints (0.5, b) and (a, 0.5).
        const LocalEdge* e1 = nullptr;
        const LocalEdge* e2 = nullptr;
        for (const auto& e : active) {
            const bool touches = (e.mx == 0.5 && e.my == static_cast<double>(b)) ||
                                 (e.my == 0.5 && e.mx == static_cast<double>(a));
            if (!touches) continue;
            (e1 ? e2 : e1) = &e;
        }
        return {e1, e2};
    };

    if (inside_count == 1 || inside_count == 3) {
        // One minority corner, cut off by a single segment.
        const int minority = inside_count == 1 ? 1 : 0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                if (w[a][b] != minority) continue;
                const auto [e1, e2] = adjacent(a, b);
                emit(*e1, *e2, a, b, minority == 1);
            }
    } else if (active.size() == 2) {
        // Two adjacent inside corners: one segment, both corners on its
        // inside side; reference either of them.
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                if (w[a][b]) {
                    emit(active[0], active[1], a, b, true);
                    return;
                }
    } else {
        // Ambiguous face: both diagonals change sign. Cut off each inside
        // corner (the two inside corners stay separated); the rule is fixed,
        // so adjacent cubes always agree.
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                if (!w[a][b]) continue;
                const auto [e1, e2] = adjacent(a, b);
                emit(*e1, *e2, a, b, true);
            }
    }
}

using TriangleList = std::vector<std::array<int, 3>>;

// Two cube edges share a face iff their face sets intersect; face ids are
// 2*axis + side.
std::array<int, 2> faces_of_edge(int edge) {
    const int axis = edge / 4;
    const int p = (edge % 4) & 1;
    const int q = (edge % 4) >> 1;
    const int ap = axis == 0 ? 1 : 0;
    const int aq = axis == 2 ? 1 : 2;
    return {2 * ap + p, 2 * aq + q};
}

bool edges_share_face(int e1, int e2) {
    const auto f1 = faces_of_edge(e1);
    const auto f2 = faces_of_edge(e2);
    return f1[0] == f2[0] || f1[0] == f2[1] || f1[1] == f2[0] || f1[1] == f2[1];
}

// Triangulates one closed loop of edge midpoints without ever creating a
// chord between two midpoints on a common cube face. Face segments are the
// only triangle edges two adjacent cubes both emit, so keeping chords off
// the faces keeps the assembled mesh two-manifold. Interval DP over the
// cycle; loops are at most 12 long.
void triangulate_loop(const std::vector<int>& loop, TriangleList& out) {
    const int n = static_cast<int>(loop.size());
    if (n == 3) {
        out.push_back({loop[0], loop[1], loop[2]});
        return;
    }
    auto chord_cost = [&](int i, int j) {
        if (j - i <= 1 || (i == 0 && j == n - 1)) return 0;  // polygon edge
        return edges_share_face(loop[i], loop[j]) ? 1 : 0;
    };
    std::vector<std::vector<int>> dp(n, std::vector<int>(n, 0));
    std::vector<std::vector<int>> split(n, std::vector<int>(n, -1));
    for (int len = 2; len < n; ++len)
        for (int i = 0; i + len < n; ++i) {
            const int j = i + len;
            int best = INT_MAX, best_k = -1;
            for (int k = i + 1; k < j; ++k) {
                const int c = dp[i][k] + dp[k][j] + chord_cost(i, k) + chord_cost(k, j);
                if (c < best) {
                    best = c;
                    best_k = k;
                }
            }
            dp[i][j] = best;
            split[i][j] = best_k;
        }
    if (dp[0][n - 1] != 0)
        throw InternalError("case table: loop cannot avoid face-coincident chords");

    std::vector<std::pair<int, int>> stack{{0, n - 1}};
    while (!stack.empty()) {
        const auto [i, j] = stack.back();
        stack.pop_back();
        if (j - i < 2) continue;
        const int k = split[i][j];
        out.push_back({loop[i], loop[k], loop[j]});
        stack.emplace_back(i, k);
        stack.emplace_back(k, j);
    }
}

// 256-entry case table, generated from the per-face segment rules above.
// Segments chain into closed loops; because every face uses the same fixed
// rules, adjacent cubes always share the same polyline on their common face.
std::array<TriangleList, 256> build_case_table() {
    std::array<TriangleList, 256> table;
    const auto faces = make_faces();
    for (int config = 1; config < 255; ++config) {
        std::vector<Segment> segs;
        for (const auto& f : faces) face_segments(f, config, segs);

        std::array<int, 12> next;
        next.fill(-1);
        std::array<bool, 12> present{};
        for (const auto& s : segs) {
            if (next[s.from_edge] != -1)
                throw InternalError("case table: edge with two outgoing segments");
            next[s.from_edge] = s.to_edge;
            present[s.from_edge] = true;
            present[s.to_edge] = true;
        }
        for (int e = 0; e < 12; ++e)
            if (present[e] && next[e] == -1)
                throw InternalError("case table: open segment chain");

        std::array<bool, 12> used{};
        for (int start = 0; start < 12; ++start) {
            if (!present[start] || used[start]) continue;
            std::vector<int> loop;
            int e = start;
            do {
                loop.push_back(e);
                used[e] = true;
                e = next[e];
            } while (e != start);
            if (loop.size() < 3) throw InternalError("case table: degenerate loop");
            triangulate_loop(loop, table[config]);
        }
    }
    return table;
}

const std::array<TriangleList, 256>& case_table() {
    static const std::array<TriangleList, 256> table = build_case_table();
    return table;
}

}  // namespace

TriMesh marching_cubes(const BinaryGrid& grid, double iso) {
    require_binary(grid, "marching_cubes");
    const Eigen::Index fg = count_foreground(grid);
    if (fg == 0) throw UserError("marching_cubes: grid is empty, no surface to extract");
    if (fg == grid.size()) throw UserError("marching_cubes: grid is full, no surface to extract");
    if (!(iso > 0.0 && iso < 1.0)) throw UserError("marching_cubes: iso must lie in (0,1)");

    const auto& table = case_table();

    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::unordered_map<std::uint64_t, int> vertex_of_edge;

    auto edge_key = [](int axis, int x, int y, int z) {
        // Coordinates start at -1 (virtual padding); bias to stay unsigned.
        return static_cast<std::uint64_t>(axis) |
               (static_cast<std::uint64_t>(x + 1) << 2) |
               (static_cast<std::uint64_t>(y + 1) << 22) |
               (static_cast<std::uint64_t>(z + 1) << 42);
    };

    auto vertex_index = [&](int axis, int bx, int by, int bz) {
        const std::uint64_t key = edge_key(axis, bx, by, bz);
        const auto it = vertex_of_edge.find(key);
        if (it != vertex_of_edge.end()) return it->second;
        const double va = grid.at_or_zero(bx, by, bz);
        int ox = bx, oy = by, oz = bz;
        (axis == 0 ? ox : axis == 1 ? oy : oz) += 1;
        const double vb = grid.at_or_zero(ox, oy, oz);
        const double t = (iso - va) / (vb - va);
        const Vec3 pa = grid.voxel_center(bx, by, bz);
        const Vec3 pb = grid.voxel_center(ox, oy, oz);
        vertices.emplace_back(pa + t * (pb - pa));
        const int idx = static_cast<int>(vertices.size()) - 1;
        vertex_of_edge.emplace(key, idx);
        return idx;
    };

    for (int cz = -1; cz < grid.dims.z(); ++cz)
        for (int cy = -1; cy < grid.dims.y(); ++cy)
            for (int cx = -1; cx < grid.dims.x(); ++cx) {
                int config = 0;
                for (int i = 0; i < 8; ++i) {
                    const double v =
                        grid.at_or_zero(cx + (i & 1), cy + ((i >> 1) & 1), cz + ((i >> 2) & 1));
                    if (v > iso) config |= 1 << i;
                }
                if (config == 0 || config == 255) continue;
                for (const auto& tri : table[config]) {
                    std::array<int, 3> vi;
                    for (int k = 0; k < 3; ++k) {
                        const int axis = tri[k] / 4;
                        const int p = (tri[k] % 4) & 1;
                        const int q = (tri[k] % 4) >> 1;
                        int bx = cx, by = cy, bz = cz;
                        if (axis == 0) {
                            by += p;
                            bz += q;
                        } else if (axis == 1) {
                            bx += p;
                            bz += q;
                        } else {
                            bx += p;
                            by += q;
                        }
                        vi[k] = vertex_index(axis, bx, by, bz);
                    }
                    triangles.push_back(vi);
                }
            }

    TriMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(vertices.size()), 3);
    for (std::size_t i = 0; i < vertices.size(); ++i) mesh.vertices.row(i) = vertices[i];
    mesh.triangles.resize(static_cast<Eigen::Index>(triangles.size()), 3);
    for (std::size_t i = 0; i < triangles.size(); ++i)
        for (int k = 0; k < 3; ++k) mesh.triangles(i, k) = triangles[i][k];
    mesh.validate();
    return mesh;
}

}  // namespace implantgen
