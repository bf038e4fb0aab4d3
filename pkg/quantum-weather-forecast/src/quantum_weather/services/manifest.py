"""
Manifesto de experimentos e artefatos por repetição.

Registra, para cada configuração de modelo, o que foi executado e com
quais entradas, permitindo:
- Rastreabilidade (configuração, sementes, hash do dataset)
- Retomada e inspeção posterior (parâmetros finais em JSON)
- Idempotência das etapas (hash de conteúdo das entradas)

Estrutura em disco::

    <out>/train/<model_key>/manifest.json
    <out>/train/<model_key>/runs/<seed>/history.csv
    <out>/train/<model_key>/runs/<seed>/predictions.csv
    <out>/train/<model_key>/runs/<seed>/run.json
    <out>/stages.json
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
import pandas as pd

from ..data.ingest import DailyDataset, atomic_write_text
from ..errors import ReportError
from .trainer import LossHistory, RunReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def content_hash(payload: Any) -> str:
    """SHA-256 do JSON canônico (chaves ordenadas) de ``payload``."""
    texto = json.dumps(payload, sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(texto.encode('utf-8')).hexdigest()


def dataset_hash(dataset: DailyDataset) -> str:
    """Hash do conteúdo do dataset no mesmo formato CSV do cache."""
    frame = dataset.to_frame()
    frame.index = frame.index.strftime('%Y-%m-%d')
    texto = frame.to_csv(index_label='date', na_rep='', lineterminator='\n')
    return hashlib.sha256(texto.encode('utf-8')).hexdigest()


def _dump_json(path: Path, payload: Mapping[str, Any]) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + '\n')


def _to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, lineterminator='\n')


class ExperimentStore:
    """
    Leitura e escrita dos artefatos de treinamento.

    Exemplo de uso:
        >>> store = ExperimentStore('out')
        >>> store.write_run(report)
        >>> store.write_manifest('qnn_exp2_d1', {...})
        >>> reports = store.load_runs('qnn_exp2_d1')
    """

    def __init__(self, out_dir: PathLike):
        self.out_dir = Path(out_dir)

    def experiment_dir(self, model_key: str) -> Path:
        return self.out_dir / 'train' / model_key

    def run_dir(self, model_key: str, seed: int) -> Path:
        return self.experiment_dir(model_key) / 'runs' / str(seed)

    def manifest_path(self, model_key: str) -> Path:
        return self.experiment_dir(model_key) / 'manifest.json'

    def write_run(self, report: RunReport) -> Path:
        """Grava histórico, previsões e parâmetros finais de uma repetição."""
        pasta = self.run_dir(report.model_key, report.seed)
        atomic_write_text(pasta / 'history.csv', _to_csv(report.history.to_frame()))
        atomic_write_text(pasta / 'predictions.csv', _to_csv(report.predictions_frame()))
        _dump_json(pasta / 'run.json', {
            'seed': report.seed,
            'model_key': report.model_key,
            'mae': report.mae,
            'accuracy_pct': report.accuracy_pct,
            'mae_native': report.mae_native,
            'output_bound': list(report.output_bound) if report.output_bound else None,
            'params': report.params,
        })
        return pasta

    def load_run(self, model_key: str, seed: int) -> RunReport:
        """Reconstrói um RunReport a partir dos artefatos em disco."""
        pasta = self.run_dir(model_key, seed)
        try:
            with open(pasta / 'run.json', encoding='utf-8') as f:
                meta = json.load(f)
            historico = pd.read_csv(pasta / 'history.csv', float_precision='round_trip')
            previsoes = pd.read_csv(pasta / 'predictions.csv', float_precision='round_trip')
        except (OSError, ValueError) as e:
            raise ReportError(f"Artefatos ilegiveis em {pasta}: {e}") from e

        return RunReport(
            seed=int(meta['seed']),
            model_key=str(meta['model_key']),
            params=meta['params'],
            dates=pd.DatetimeIndex(pd.to_datetime(previsoes['date'], format='%Y-%m-%d'), name='date'),
            predictions=previsoes['prediction'].to_numpy(dtype=np.float64),
            predictions_native=previsoes['prediction_native'].to_numpy(dtype=np.float64),
            actual=previsoes['actual'].to_numpy(dtype=np.float64),
            actual_native=previsoes['actual_native'].to_numpy(dtype=np.float64),
            history=LossHistory.from_frame(historico),
            mae=float(meta['mae']),
            accuracy_pct=float(meta['accuracy_pct']),
            mae_native=float(meta['mae_native']),
            output_bound=tuple(meta['output_bound']) if meta.get('output_bound') else None,
        )

    def write_manifest(self, model_key: str, payload: Mapping[str, Any]) -> Path:
        caminho = self.manifest_path(model_key)
        registro = dict(payload)
        registro.setdefault('model_key', model_key)
        registro.setdefault('layout', {
            'history': 'runs/<seed>/history.csv',
            'predictions': 'runs/<seed>/predictions.csv',
            'run': 'runs/<seed>/run.json',
        })
        _dump_json(caminho, registro)
        logger.info(f"Manifesto gravado: {caminho}")
        return caminho

    def read_manifest(self, model_key: str) -> Optional[Dict[str, Any]]:
        caminho = self.manifest_path(model_key)
        if not caminho.exists():
            return None
        with open(caminho, encoding='utf-8') as f:
            return json.load(f)

    def load_runs(self, model_key: str) -> List[RunReport]:
        """Carrega as repetições concluídas listadas no manifesto."""
        manifesto = self.read_manifest(model_key)
        if manifesto is None:
            raise ReportError(f"Manifesto ausente para {model_key}; execute a etapa de treino")
        return [self.load_run(model_key, int(s)) for s in manifesto.get('completed_seeds', [])]


class StageRegistry:
    """
    Registro de hashes de entrada por etapa (``<out>/stages.json``).

    Uma etapa cujo hash de entrada não mudou desde a última execução
    bem-sucedida pode ser pulada.
    """

    def __init__(self, out_dir: PathLike):
        self.path = Path(out_dir) / 'stages.json'

    def _read(self) -> Dict[str, Any]:
        if not self.path.exists():
            return {}
        with open(self.path, encoding='utf-8') as f:
            return json.load(f)

    def is_current(self, stage: str, input_hash: str) -> bool:
        return self._read().get(stage, {}).get('input_hash') == input_hash

    def mark(self, stage: str, input_hash: str) -> None:
        registro = self._read()
        registro[stage] = {'input_hash': input_hash}
        _dump_json(self.path, registro)
        logger.info(f"Etapa {stage} registrada (hash {input_hash[:12]})")

    def invalidate(self, stage: str) -> None:
        registro = self._read()
        if registro.pop(stage, None) is not None:
            _dump_json(self.path, registro)
