// Train on six hours of synthetic EV-charging data, then roll the estimator
// over the next six hours and print the interval scores.

#include <prosumpi/prosumpi.hpp>

#include <cstdio>
#include <vector>

int main() {
    using namespace prosumpi;

    const auto data = generate(SyntheticProfile::defaults(ProfileKind::ev_station, 7), 12 * 3600.0, 20);
    const std::size_t half = data.size() / 2;
    const auto train = data.slice(0, half);
    const auto test = data.slice(half, data.size() - half);

    EstimatorConfig config;
    config.variant = ModelVariant::B;
    config.clusters = 8;
    config.forgetting = {train.period_s(), 3600.0};
    auto est = Estimator::batch_train(config, train);

    const std::vector<double> alphas{0.99, 0.999};
    const auto first = est.estimate(0.99);
    std::printf("next-sample PI at 99%%: [%.1f, %.1f] W\n", first.lower, first.upper);

    const auto log = run_backtest(est, test, alphas);
    const auto report = evaluate(log, est.p_nom());
    for (const auto& m : report.metrics)
        std::printf("alpha %-6g PINAW %.5f  PICP %.5f  CWC %.5f\n", m.alpha, m.pinaw, m.picp, m.cwc);
    return 0;
}
