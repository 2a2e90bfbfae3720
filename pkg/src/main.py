import os
import sys
import logging
# 讓 `python src/main.py` 也能找到 src 套件
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

import click

from src.models.reports import RunConfig
from src.models.scalar import FLOAT, RATIONAL
from src.routes.geometry import geometry
from src.routes.model_checks import check_model
from src.routes.symmetry import symmetry

logger = logging.getLogger(__name__)


def configure_logging(verbose=False):
    level = logging.DEBUG if verbose else os.getenv('JT_LOG_LEVEL', 'WARNING').upper()
    # 日誌一律寫到 stderr，stdout 只留給 JSON 報告
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s', force=True)


@click.group()
@click.option('--mode', type=click.Choice([RATIONAL, FLOAT]), default=lambda: os.getenv('JT_MODE', RATIONAL),
              help='純量模式（JT_MODE）')
@click.option('--tol', type=float, default=lambda: float(os.getenv('JT_TOL', '1e-9')),
              help='float 模式的容許誤差（JT_TOL）')
@click.option('--seed', type=int, default=lambda: int(os.getenv('JT_SEED', '0')),
              help='隨機取樣的種子（JT_SEED）')
@click.option('--points', type=int, default=lambda: int(os.getenv('JT_POINTS', '5')),
              help='取樣點數（JT_POINTS）')
@click.option('--out', type=click.Path(), default=None, help='報告輸出檔，預設為 stdout')
@click.option('--verbose', is_flag=True, help='輸出 DEBUG 日誌')
@click.option('--no-timing', is_flag=True, help='報告不含執行時間，重跑結果逐位元相同')
@click.pass_context
def cli(ctx, mode, tol, seed, points, out, verbose, no_timing):
    """Jacobi–Tsankov 曲率模型與平面波度量的批次檢查工具"""
    configure_logging(verbose)
    ctx.obj = RunConfig(mode, tol, seed, points, out, not no_timing)
    logger.debug(f"設定：{ctx.obj}")


# 註冊指令群組
cli.add_command(check_model)
cli.add_command(symmetry)
cli.add_command(geometry)


if __name__ == '__main__':
    logger.info("啟動 CLI")
    cli()
