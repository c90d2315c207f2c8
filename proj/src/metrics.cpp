#include "bayesfault/metrics.hpp"

#include "bayesfault/errors.hpp"

namespace bayesfault {
namespace {

double ratio(std::size_t num, std::size_t den) noexcept {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void Confusion::add(Label truth, Label predicted) noexcept {
    if (truth == Label::Fault) {
        ++(predicted == Label::Fault ? true_positive : false_negative);
    } else {
        ++(predicted == Label::Fault ? false_positive : true_negative);
    }
}

double Confusion::precision() const noexcept { return ratio(true_positive, true_positive + false_positive); }

double Confusion::recall() const noexcept { return ratio(true_positive, true_positive + false_negative); }

double Confusion::f1() const noexcept {
    return ratio(2 * true_positive, 2 * true_positive + false_positive + false_negative);
}

double Confusion::accuracy() const noexcept { return ratio(true_positive + true_negative, total()); }

Confusion confusion(std::span<const Label> truth, std::span<const Label> predicted) {
    if (truth.size() != predicted.size()) {
        throw InvalidInput("confusion: " + std::to_string(truth.size()) + " labels but " +
                           std::to_string(predicted.size()) + " predictions");
    }
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) c.add(truth[i], predicted[i]);
    return c;
}

}  // namespace bayesfault
