#include "batchq/model.hpp"

#include <cmath>
#include <sstream>

#include "batchq/error.hpp"

namespace batchq {

QueueModel::QueueModel(InterArrivalDist a, FinitePmf g, double mu, CapacityDist y)
    : arrival_(std::move(a)), batch_(std::move(g)), capacity_(std::move(y)), mu_(mu) {
    lambda_ = 1.0 / arrival_.mean();
    g_bar_ = batch_.mean();
    y_bar_ = capacity_.mean();
    rho_ = lambda_ * g_bar_ / (mu_ * y_bar_);
}

QueueModel build_model(InterArrivalDist arrival, FinitePmf batch, double mu, CapacityDist capacity) {
    if (!(mu > 0.0 && mu <= 1.0)) {
        std::ostringstream os;
        os << "service probability mu = " << mu << " must lie in (0, 1)";
        throw Error(ErrorCode::InvalidModel, os.str());
    }
    QueueModel m(std::move(arrival), std::move(batch), mu, std::move(capacity));
    if (!(m.rho() < 1.0)) {
        std::ostringstream os;
        os.precision(6);
        os << "unstable model: rho = " << m.rho() << " >= 1";
        throw Error(ErrorCode::Unstable, os.str());
    }
    return m;
}

}  // namespace batchq
