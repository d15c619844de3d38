#pragma once

#include <span>
#include <string>

#include "nomina/error.hpp"

namespace nomina {

/// Counts with label 1 (male) as the positive class.
struct ConfusionMatrix {
    long long tp = 0;
    long long tn = 0;
    long long fp = 0;
    long long fn = 0;

    long long total() const { return tp + tn + fp + fn; }
};

/// Tallies thresholded predictions against labels; both vectors binary and of
/// equal nonzero length.
ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels);

struct MetricsReport {
    double accuracy = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    bool degenerate = false;  // a zero denominator forced some score to 0
    std::string model;
    std::string dataset;
};

/// accuracy = (TN+TP)/total, recall = TP/(FN+TP), precision = TP/(FP+TP),
/// f1 = harmonic mean of the last two. Zero-denominator scores come back as 0
/// with the degenerate flag set instead of raising.
MetricsReport scores(const ConfusionMatrix& cm);

/// `model,dataset,accuracy,recall,precision,f1`, one row per report.
std::string report_csv(std::span<const MetricsReport> reports);

/// `tp,fp,fn,tn` header plus one count row.
std::string confusion_csv(const ConfusionMatrix& cm);

}  // namespace nomina
