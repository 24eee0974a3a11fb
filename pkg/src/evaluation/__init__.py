from .representations import (
    RepresentationSet, extract_node_representations, features_as_representations,
    load_representations, save_representations,
)
from .classifier import LinearModel, logistic_loss, train_linear_classifier
from .voting import majority_vote
from .protocols import (
    EvalRecord, EvalReport, accuracy, evaluate, evaluate_graph_task, evaluate_node_task,
    raw_feature_baseline, step_accuracy_sweep,
)
from .report import write_report

__all__ = [
    'RepresentationSet', 'extract_node_representations', 'features_as_representations',
    'load_representations', 'save_representations',
    'LinearModel', 'logistic_loss', 'train_linear_classifier',
    'majority_vote',
    'EvalRecord', 'EvalReport', 'accuracy', 'evaluate', 'evaluate_graph_task', 'evaluate_node_task',
    'raw_feature_baseline', 'step_accuracy_sweep',
    'write_report',
]
