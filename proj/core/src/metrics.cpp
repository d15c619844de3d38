#include "nomina/metrics.hpp"

#include <cstdio>

namespace nomina {

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size())
        throw LengthMismatch("confusion: " + std::to_string(predictions.size()) +
                             " predictions vs " + std::to_string(labels.size()) + " labels");
    if (predictions.empty()) throw EmptyBatch("confusion: nothing to tally");

    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i], y = labels[i];
        if ((p != 0 && p != 1) || (y != 0 && y != 1))
            throw InvalidArgument("confusion: entries must be 0 or 1");
        if (y == 1)
            ++(p == 1 ? cm.tp : cm.fn);
        else
            ++(p == 1 ? cm.fp : cm.tn);
    }
    return cm;
}

MetricsReport scores(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw EmptyMatrix("scores: empty confusion matrix");
    if (cm.tp < 0 || cm.tn < 0 || cm.fp < 0 || cm.fn < 0)
        throw InvalidArgument("scores: negative count");

    MetricsReport r;
    r.accuracy = static_cast<double>(cm.tn + cm.tp) / static_cast<double>(cm.total());
    if (cm.fn + cm.tp > 0) {
        r.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.fn + cm.tp);
    } else {
        r.degenerate = true;
    }
    if (cm.fp + cm.tp > 0) {
        r.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.fp + cm.tp);
    } else {
        r.degenerate = true;
    }
    if (r.precision + r.recall > 0.0) {
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    } else {
        r.degenerate = true;
    }
    return r;
}

std::string report_csv(std::span<const MetricsReport> reports) {
    std::string out = "model,dataset,accuracy,recall,precision,f1\n";
    char buf[128];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f,%.6f\n", r.accuracy, r.recall,
                      r.precision, r.f1);
        out += r.model;
        out += ',';
        out += r.dataset;
        out += buf;
    }
    return out;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "tp,fp,fn,tn\n%lld,%lld,%lld,%lld\n", cm.tp, cm.fp, cm.fn,
                  cm.tn);
    return buf;
}

}  // namespace nomina
