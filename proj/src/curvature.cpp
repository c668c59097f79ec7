#include "rangerec/curvature.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace rangerec {

CornerType corner_type_from_class(int shape_class) {
    if (shape_class == 1) return CornerType::Convex;
    if (shape_class == 2) return CornerType::Concave;
    throw Error("no corner type for shape class " + std::to_string(shape_class));
}

CurvaturePair fit_quadric(const RangeScan& scan, const Vec3& f, double radius) {
    std::vector<Vec3> nb;
    for (const auto& p : scan.points)
        if ((p - f).norm() <= radius) nb.push_back(p);
    if (nb.size() < 6)
        throw InsufficientSupport("quadric fit needs at least 6 points, got " +
                                  std::to_string(nb.size()));

    Vec3 centroid = Vec3::Zero();
    for (const auto& p : nb) centroid += p;
    centroid /= static_cast<double>(nb.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : nb) cov += (p - centroid) * (p - centroid).transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    Vec3 w_axis = eig.eigenvectors().col(0); // least variance
    if (w_axis.dot(scan.gaze) < 0) w_axis = -w_axis;
    Vec3 u_axis = eig.eigenvectors().col(2);
    Vec3 v_axis = w_axis.cross(u_axis).normalized();
    u_axis = v_axis.cross(w_axis).normalized();

    Eigen::MatrixXd design(nb.size(), 6);
    Eigen::VectorXd height(nb.size());
    for (size_t i = 0; i < nb.size(); ++i) {
        Vec3 d = nb[i] - f;
        double u = u_axis.dot(d), v = v_axis.dot(d);
        design(static_cast<Eigen::Index>(i), 0) = u * u;
        design(static_cast<Eigen::Index>(i), 1) = u * v;
        design(static_cast<Eigen::Index>(i), 2) = v * v;
        design(static_cast<Eigen::Index>(i), 3) = u;
        design(static_cast<Eigen::Index>(i), 4) = v;
        design(static_cast<Eigen::Index>(i), 5) = 1.0;
        height(static_cast<Eigen::Index>(i)) = w_axis.dot(d);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 6)
        throw DegenerateFit("rank-deficient quadric fit");
    Eigen::VectorXd coeff = qr.solve(height);

    Eigen::Matrix2d hessian;
    hessian << 2.0 * coeff(0), coeff(1), coeff(1), 2.0 * coeff(2);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> h_eig(hessian);
    CurvaturePair pair;
    pair.c1 = h_eig.eigenvalues()(1);
    pair.c2 = h_eig.eigenvalues()(0);
    return pair;
}

double c_score(CornerType type, const CurvaturePair& pair) {
    if (type == CornerType::Convex) return std::min(pair.c1, pair.c2);
    return std::min(-pair.c1, -pair.c2);
}

} // namespace rangerec
