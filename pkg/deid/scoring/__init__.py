from deid.scoring.answer_key import AnswerKeyEntry, Category, dump_answer_key, load_answer_key
from deid.scoring.report import render_table, report_to_dict, write_report
from deid.scoring.scorer import ScoreReport, score

__all__ = [
    "AnswerKeyEntry",
    "Category",
    "ScoreReport",
    "dump_answer_key",
    "load_answer_key",
    "render_table",
    "report_to_dict",
    "score",
    "write_report",
]
