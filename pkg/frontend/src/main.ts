/**
 * Browser entry point: virtualized feed on the left, detail panel on the
 * right, connection status and counters in the header.  All prioritisation
 * lives server-side; this file only paints commands and reports
 * interactions.
 */

import { FeedConnection } from './connection.js';
import { FeedModel, FeedRow, visibleWindow } from './feedModel.js';
import { PanelState, panelLines, togglePanel } from './panel.js';
import { serializeSignal } from './protocol.js';
import { SignalEmitter } from './signals.js';

const ROW_HEIGHT = 26;

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
}

function start(): void {
    const root = document.getElementById('app');
    if (!root) return;

    const status = el('div', 'status', 'connecting…');
    const stats = el('div', 'stats');
    const header = el('header');
    header.append(el('h1', undefined, 'live telemetry feed'), status, stats);

    const viewport = el('div', 'viewport');
    const padTop = el('div');
    const list = el('div', 'rows');
    const padBottom = el('div');
    viewport.append(padTop, list, padBottom);

    const panel = el('aside', 'panel empty');
    panel.textContent = 'select a row to inspect it';

    const mainRow = el('div', 'columns');
    mainRow.append(viewport, panel);
    root.append(header, mainRow);

    const model = new FeedModel();
    const emitter = new SignalEmitter();
    let panelState: PanelState = { open: false, row: null };
    let renderQueued = false;
    let pinnedToTail = true;

    const wsUrl = `ws://${location.host}/ws`;
    const connection = new FeedConnection(wsUrl, {
        onCommand: (cmd) => {
            model.apply(cmd);
            queueRender();
        },
        onStatus: (s) => {
            status.textContent = s;
            status.dataset.state = s;
        },
    });

    function queueRender(): void {
        if (renderQueued) return;
        renderQueued = true;
        requestAnimationFrame(() => {
            renderQueued = false;
            render();
        });
    }

    function render(): void {
        if (pinnedToTail) {
            viewport.scrollTop = model.rows.length * ROW_HEIGHT;
        }
        const win = visibleWindow(
            viewport.scrollTop,
            ROW_HEIGHT,
            viewport.clientHeight || 600,
            model.rows.length,
        );
        padTop.style.height = `${win.padTop}px`;
        padBottom.style.height = `${win.padBottom}px`;
        list.textContent = '';
        for (let i = win.start; i < win.end; i += 1) {
            list.append(renderRow(model.rows[i]));
        }
        stats.textContent =
            `rows ${model.rows.length} | last seq ${model.lastSeq}` +
            ` | dup ${model.duplicates} | trimmed ${model.overflowDropped}`;
        renderPanel();
    }

    function renderRow(row: FeedRow): HTMLElement {
        const node = el('div', `row ${row.classBadge}${row.pulsing ? ' pulsing' : ''}`);
        node.style.height = `${ROW_HEIGHT}px`;
        node.style.opacity = String(row.opacity);
        node.append(el('span', 'badge', row.classBadge), el('span', 'label', row.label));
        node.onclick = () => {
            panelState = togglePanel(panelState, row);
            if (panelState.open && row.kind === 'event') {
                const d = row.detail as import('./protocol.js').EventPayload;
                emitter.select(
                    { sources: [d.source], actors: [d.actor], kinds: [d.kind] },
                    performance.now(),
                );
            } else if (panelState.open && row.kind === 'cluster') {
                const d = row.detail as import('./protocol.js').ClusterPayload;
                emitter.select(
                    { sources: [d.representative.source], actors: [], kinds: [] },
                    performance.now(),
                );
            } else {
                emitter.clearSelection();
            }
            queueRender();
        };
        return node;
    }

    function renderPanel(): void {
        if (!panelState.open || !panelState.row) {
            panel.className = 'panel empty';
            panel.textContent = 'select a row to inspect it';
            return;
        }
        panel.className = 'panel';
        panel.textContent = '';
        for (const line of panelLines(panelState.row)) {
            panel.append(el('div', 'panel-line', line));
        }
    }

    viewport.addEventListener('scroll', () => {
        const tail = model.rows.length * ROW_HEIGHT - viewport.clientHeight;
        pinnedToTail = viewport.scrollTop >= tail - 2 * ROW_HEIGHT;
        emitter.onScroll(viewport.scrollTop, performance.now());
        queueRender();
    });

    setInterval(() => {
        const sig = emitter.poll(performance.now());
        if (sig) connection.send(serializeSignal(sig));
    }, 50);

    connection.connect();
}

document.addEventListener('DOMContentLoaded', start);
