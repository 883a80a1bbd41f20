"""SVM fusion of the two streams plus evaluation artifacts."""
from .checkpoint import SvmFormatError, load_svm, save_svm
from .report import (
    ConfusionMatrix,
    class_names,
    confusion_matrix,
    percent_change,
    percent_change_table,
    pr_points,
)
from .smo import (
    BinarySvm,
    SvmConfig,
    SvmModel,
    gram_matrix,
    kkt_violation,
    poly_kernel,
    svm_fit,
    svm_predict,
    svm_scores,
)
from .validate import CvResult, SearchSpace, kfold_cv, random_search, stratified_folds

__all__ = [
    "BinarySvm",
    "ConfusionMatrix",
    "CvResult",
    "SearchSpace",
    "SvmConfig",
    "SvmFormatError",
    "SvmModel",
    "class_names",
    "confusion_matrix",
    "gram_matrix",
    "kfold_cv",
    "kkt_violation",
    "load_svm",
    "percent_change",
    "percent_change_table",
    "poly_kernel",
    "pr_points",
    "random_search",
    "save_svm",
    "stratified_folds",
    "svm_fit",
    "svm_predict",
    "svm_scores",
]
