import functools
import json
import logging
import time

import click

from src.models import JacobiTsankovError
from src.models.reports import Report, RunConfig

logger = logging.getLogger(__name__)

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_ERROR = 2


def _write(config, envelope):
    text = json.dumps(envelope, ensure_ascii=False, indent=2)
    if config.out:
        with open(config.out, 'w', encoding='utf-8') as f:
            f.write(text + '\n')
        logger.info(f"報告寫入 {config.out}")
    else:
        click.echo(text)


def emit_report(config: RunConfig, report: Report):
    envelope = {
        'status': 'success' if report.holds else 'failure',
        'data': report.to_dict(),
    }
    if not report.holds:
        failed = [c.name for c in report.checks if not c.holds]
        envelope['message'] = f"檢查失敗：{', '.join(failed)}"
    _write(config, envelope)
    click.echo(report.summary(), err=True)


def emit_error(config: RunConfig, command, error):
    _write(config, {'status': 'error', 'command': command, 'message': str(error)})
    click.echo(f"{command}: 錯誤：{error}", err=True)


def reported(command):
    """把回傳 Report 的指令本體包成：輸出 JSON 信封、摘要寫到 stderr、設定結束碼"""
    def decorator(fn):
        @functools.wraps(fn)
        def wrapper(**kwargs):
            ctx = click.get_current_context()
            config = ctx.find_object(RunConfig)
            start = time.perf_counter()
            try:
                report = fn(config, **kwargs)
            except (JacobiTsankovError, OSError, ValueError, ArithmeticError) as e:
                logger.error(f"{command} 失敗：{e}")
                emit_error(config, command, e)
                ctx.exit(EXIT_ERROR)
            if config.timing:
                report.duration = time.perf_counter() - start
            emit_report(config, report)
            ctx.exit(EXIT_HOLDS if report.holds else EXIT_FAILS)
        return wrapper
    return decorator
