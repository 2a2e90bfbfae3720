import json

from click.testing import CliRunner
from pytest import approx, fixture, mark

from src.main import cli
from src.routes import EXIT_ERROR, EXIT_FAILS, EXIT_HOLDS


@fixture
def runner():
    return CliRunner()


def run(runner, *args, env=None):
    result = runner.invoke(cli, ['--no-timing', *args], env=env)
    envelope = json.loads(result.stdout) if result.stdout.strip() else None
    return result, envelope


def test_check_model_holds(runner):
    result, envelope = run(runner, 'check-model', 'm14', '--properties', 'jacobi-square-zero')
    assert result.exit_code == EXIT_HOLDS
    assert envelope['status'] == 'success'
    assert envelope['data']['data']['signature'] == [8, 6]
    assert envelope['data']['data']['dim'] == 14
    assert [c['property'] for c in envelope['data']['checks']] == ['curvature-symmetries', 'jacobi-square-zero']


def test_check_model_failure_has_witness(runner):
    result, envelope = run(runner, 'check-model', 'm14', '--properties', 'skew-tsankov')
    assert result.exit_code == EXIT_FAILS
    assert envelope['status'] == 'failure'
    assert 'skew-tsankov' in envelope['message']
    failed = envelope['data']['checks'][-1]
    assert failed['verdict'] == 'fails'
    assert failed['witness']['relation'] == 'commutator'
    assert failed['witness']['operands'] == [
        {'kind': 'A', 'indices': ['a1', 'a2']},
        {'kind': 'A', 'indices': ['a1', 'a3']},
    ]
    assert failed['witness']['target'] == 'a3'
    assert failed['witness']['residual'] == {'a2*': {'num': '-4', 'den': '3'}}


def test_check_model_jacobi_nilpotent_witness(runner):
    result, envelope = run(runner, 'check-model', 'm14', '--properties', '2-step-jacobi-nilpotent')
    assert result.exit_code == EXIT_FAILS
    witness = envelope['data']['checks'][-1]['witness']
    assert witness['relation'] == 'product'
    assert witness['operands'] == [
        {'kind': 'J', 'indices': ['a3', 'a3']},
        {'kind': 'J', 'indices': ['a2', 'a2']},
    ]
    assert witness['target'] == 'a1'
    assert witness['residual'] == {'a1*': {'num': '1', 'den': '1'}}


def test_unknown_property_is_an_error(runner):
    result, envelope = run(runner, 'check-model', 'm14', '--properties', 'tsankov')
    assert result.exit_code == EXIT_ERROR
    assert envelope['status'] == 'error'
    assert envelope['command'] == 'check-model'


def test_missing_model_file(runner):
    result, envelope = run(runner, 'check-model', 'no-such-model.json')
    assert result.exit_code == EXIT_ERROR
    assert envelope['status'] == 'error'


def test_symmetry_generators_and_kernel(runner):
    result, envelope = run(runner, 'symmetry', 'm14', '--generator', 'swap12',
                           '--generator', 'rotation:3/5,4/5', '--kernel-dim', '--kernel-random', '2')
    assert result.exit_code == EXIT_HOLDS
    data = envelope['data']
    assert data['data']['kernel_dimension'] == 21
    assert data['data']['constraint_rank'] == 6
    names = [c['property'] for c in data['checks']]
    assert names[:2] == ['is-symmetry[swap12]', 'is-symmetry[rotation:3/5,4/5]']
    assert 'kernel-random-tau[1]' in names


def test_symmetry_failure(runner):
    result, envelope = run(runner, 'symmetry', 'm14', '--generator', 'dilatation:2,1,1')
    assert result.exit_code == EXIT_FAILS
    assert envelope['data']['checks'][0]['mismatches']


def test_symmetry_needs_an_action(runner):
    result = runner.invoke(cli, ['symmetry', 'm14'])
    assert result.exit_code == 2


def test_verify_0_model_on_default_m_a(runner):
    result, envelope = run(runner, '--points', '2', 'geometry', 'm-a', 'verify-0-model')
    assert result.exit_code == EXIT_HOLDS
    assert envelope['data']['checks'][0]['stats']['points_checked'] == 2


def test_ones_family_is_not_symmetric(runner):
    result, envelope = run(runner, '--points', '2', 'geometry', 'm-a', '--params', 'ones.json', 'symmetric')
    assert result.exit_code == EXIT_FAILS
    details = envelope['data']['checks'][0]['details']
    assert details['equations_hold'] is False
    assert details['verdicts_agree'] is True


def test_xi_sweep_on_exp_family(runner, tmp_path):
    csv_path = tmp_path / 'xi.csv'
    result, envelope = run(runner, 'geometry', 'm-phi', '--params', 'exp-family.json', 'xi',
                           '--sweep', 'x1=0:1:0.5', '--method', 'direct', '--csv', str(csv_path))
    assert result.exit_code == EXIT_HOLDS
    values = envelope['data']['data']['values']
    assert [v['x1'] for v in values] == approx([0.0, 0.5, 1.0])
    assert all(v['Xi'] == approx(0, abs=1e-12) for v in values)
    assert csv_path.read_text().startswith('x1,Xi\n')


def test_geodesic_and_exp_inverse(runner):
    for command in ('geodesic', 'exp-inverse'):
        result, envelope = run(runner, 'geometry', 'm-a', command,
                               '--at', '1,2,3', '--velocity', '1,-1,1/2,0,0,0,1')
        assert result.exit_code == EXIT_HOLDS, result.output
        assert envelope['data']['checks'][0]['verdict'] == 'holds'


def test_reruns_are_byte_identical(runner):
    args = ('--seed', '7', '--points', '2', 'geometry', 'm-a', 'curvature')
    first = runner.invoke(cli, ['--no-timing', *args])
    second = runner.invoke(cli, ['--no-timing', *args])
    assert first.exit_code == EXIT_HOLDS
    assert first.stdout == second.stdout


def test_out_option_writes_report(runner, tmp_path):
    out = tmp_path / 'report.json'
    result = runner.invoke(cli, ['--no-timing', '--out', str(out), 'check-model', 'm14',
                                 '--properties', 'jacobi-square-zero'])
    assert result.exit_code == EXIT_HOLDS
    assert json.loads(out.read_text())['status'] == 'success'
    assert result.stdout == ''


def test_environment_defaults(runner):
    result, envelope = run(runner, 'check-model', 'm14', '--properties', 'jacobi-square-zero',
                           env={'JT_MODE': 'float', 'JT_SEED': '11'})
    assert result.exit_code == EXIT_HOLDS
    assert envelope['data']['config']['mode'] == 'float'
    assert envelope['data']['config']['seed'] == 11


@mark.slow
def test_xi_frame_method_at_origin(runner):
    result, envelope = run(runner, 'geometry', 'm-phi', 'xi')
    assert result.exit_code == EXIT_HOLDS
    assert envelope['data']['data']['values'][0]['Xi'] == approx(1 / 81, abs=1e-9)
