from retreval.harness.creative import generate_creative_prompts
from retreval.harness.dataset import DatasetRecord, load_dataset, write_dataset
from retreval.harness.judge import JudgeVerdict, ResultRecord, exact_match, judge_evaluate, load_verdicts, write_verdicts
from retreval.harness.report import ReportSummary, combined_average, report, round_half_up, summarize
from retreval.harness.runner import RunSettings, load_results, run_benchmark

__all__ = [
    "DatasetRecord",
    "JudgeVerdict",
    "ReportSummary",
    "ResultRecord",
    "RunSettings",
    "combined_average",
    "exact_match",
    "generate_creative_prompts",
    "judge_evaluate",
    "load_dataset",
    "load_results",
    "load_verdicts",
    "report",
    "round_half_up",
    "run_benchmark",
    "summarize",
    "write_dataset",
    "write_verdicts",
]
