#include "implantgen/ply_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace implantgen {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct PlyHeader {
    Eigen::Index vertex_count = 0;
    Eigen::Index face_count = 0;
    bool has_normals = false;
    Eigen::Index split = 0;
};

PlyHeader read_header(std::istream& in, const std::string& path) {
    PlyHeader h;
    std::string line;
    if (!std::getline(in, line) || line != "ply") throw UserError(path + ": not a PLY file");
    while (std::getline(in, line)) {
        if (line == "end_header") return h;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment") {
            std::string key;
            ls >> key;
            if (key == "split") ls >> h.split;
        } else if (tok == "element") {
            std::string kind;
            Eigen::Index count;
            ls >> kind >> count;
            if (kind == "vertex") h.vertex_count = count;
            if (kind == "face") h.face_count = count;
        } else if (tok == "property") {
            std::string type, name;
            ls >> type >> name;
            if (name == "nx") h.has_normals = true;
        }
    }
    throw UserError(path + ": truncated PLY header");
}

}  // namespace

void write_mesh_ply(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UserError("cannot write mesh: " + path);
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << mesh.vertex_count() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "element face " << mesh.triangle_count() << "\n";
    out << "property list uchar int vertex_indices\n";
    out << "end_header\n";
    for (Eigen::Index v = 0; v < mesh.vertex_count(); ++v)
        out << fmt(mesh.vertices(v, 0)) << " " << fmt(mesh.vertices(v, 1)) << " "
            << fmt(mesh.vertices(v, 2)) << "\n";
    for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t)
        out << "3 " << mesh.triangles(t, 0) << " " << mesh.triangles(t, 1) << " "
            << mesh.triangles(t, 2) << "\n";
    if (!out.flush()) throw UserError("cannot write mesh: " + path);
}

TriMesh read_mesh_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UserError("mesh file not found: " + path);
    const PlyHeader h = read_header(in, path);
    TriMesh mesh;
    mesh.vertices.resize(h.vertex_count, 3);
    for (Eigen::Index v = 0; v < h.vertex_count; ++v)
        in >> mesh.vertices(v, 0) >> mesh.vertices(v, 1) >> mesh.vertices(v, 2);
    mesh.triangles.resize(h.face_count, 3);
    for (Eigen::Index t = 0; t < h.face_count; ++t) {
        int arity;
        in >> arity;
        if (arity != 3) throw UserError(path + ": only triangle faces are supported");
        in >> mesh.triangles(t, 0) >> mesh.triangles(t, 1) >> mesh.triangles(t, 2);
    }
    if (!in) throw UserError(path + ": truncated PLY body");
    return mesh;
}

void write_cloud_ply(const PointCloud& cloud, const std::string& path) {
    cloud.validate();
    std::ofstream out(path);
    if (!out) throw UserError("cannot write point cloud: " + path);
    out << "ply\nformat ascii 1.0\n";
    out << "comment split " << cloud.split << "\n";
    out << "element vertex " << cloud.count() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (cloud.has_normals())
        out << "property double nx\nproperty double ny\nproperty double nz\n";
    out << "element face 0\nproperty list uchar int vertex_indices\n";
    out << "end_header\n";
    for (Eigen::Index i = 0; i < cloud.count(); ++i) {
        out << fmt(cloud.points(i, 0)) << " " << fmt(cloud.points(i, 1)) << " "
            << fmt(cloud.points(i, 2));
        if (cloud.has_normals())
            out << " " << fmt(cloud.normals(i, 0)) << " " << fmt(cloud.normals(i, 1)) << " "
                << fmt(cloud.normals(i, 2));
        out << "\n";
    }
    if (!out.flush()) throw UserError("cannot write point cloud: " + path);
}

PointCloud read_cloud_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UserError("point cloud file not found: " + path);
    const PlyHeader h = read_header(in, path);
    PointCloud cloud;
    cloud.split = h.split;
    cloud.points.resize(h.vertex_count, 3);
    if (h.has_normals) cloud.normals.resize(h.vertex_count, 3);
    for (Eigen::Index i = 0; i < h.vertex_count; ++i) {
        in >> cloud.points(i, 0) >> cloud.points(i, 1) >> cloud.points(i, 2);
        if (h.has_normals) in >> cloud.normals(i, 0) >> cloud.normals(i, 1) >> cloud.normals(i, 2);
    }
    if (!in) throw UserError(path + ": truncated PLY body");
    cloud.validate();
    return cloud;
}

}  // namespace implantgen
