// Single-page controller. The service owns all judgement (ranking,
// status, timing); this class polls it, paints the three panes and
// forwards clicks back as POSTs. State changes therefore always take
// the same path: mutate on the server, re-render from its response.

import { ApiError, Defect, InspectorApi, Question, Site, SourcePayload, Timing } from './api';
import { escHtml, gutter, markSpans, MarkedSpan } from './highlight';
import {
  answerRow,
  defectRow,
  overwritePrompt,
  questionItem,
  siteCard,
  timingView,
} from './views';

const SKELETON = `
<div class="pane" id="pane-sites">
  <h2>Sites</h2>
  <div id="site-list"></div>
</div>
<div class="pane" id="pane-source">
  <h2>Source <span id="source-path"></span></h2>
  <div class="source-wrap">
    <pre id="source-gutter"></pre>
    <pre id="source-code"></pre>
  </div>
  <h2>Report</h2>
  <pre id="report-pane"></pre>
</div>
<div class="pane" id="pane-side">
  <h2>Questions</h2>
  <div id="overwrite-slot"></div>
  <ul id="question-list"></ul>
  <h2>Answers</h2>
  <ul id="answer-list"></ul>
  <h2>Defects</h2>
  <form id="defect-form">
    <input id="defect-desc" type="text" placeholder="what did you find?">
    <select id="defect-site"></select>
    <button type="submit" data-action="log-defect">log defect</button>
  </form>
  <div id="defect-error" class="form-error"></div>
  <ul id="defect-list"></ul>
  <h2>Timing</h2>
  <div id="timing"></div>
  <div id="conn-note"></div>
</div>`;

interface PendingOverwrite {
  questionId: string;
  answer: string;
}

export class App {
  sites: Site[] = [];
  questions: Question[] = [];
  answers: [string, string][] = [];
  defects: Defect[] = [];
  timing: Timing | null = null;
  source: SourcePayload | null = null;
  report = '';
  selectedKey: string | null = null;
  overwrite: PendingOverwrite | null = null;
  defectError = '';
  connNote = '';
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private api: InspectorApi,
    private root: HTMLElement,
    private pollMs = 2000,
  ) {
    root.innerHTML = SKELETON;
    root.addEventListener('click', (event) => this.onClick(event));
    const form = this.el('defect-form');
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      void this.logDefect();
    });
  }

  async start(): Promise<void> {
    await this.refresh();
    this.timer = setInterval(() => void this.refresh(), this.pollMs);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }

  private el(id: string): HTMLElement {
    const node = this.root.querySelector(`#${id}`);
    if (!node) throw new Error(`missing pane element #${id}`);
    return node as HTMLElement;
  }

  async refresh(): Promise<void> {
    try {
      const view = await this.api.view();
      this.sites = view.sites;
      this.questions = view.questions;
      this.answers = view.answers;
      this.defects = view.defects;
      this.timing = view.timing;
      this.source = await this.api.source();
      this.report = await this.api.reportText();
      this.connNote = '';
      if (this.selectedKey === null && this.sites.length) {
        this.selectedKey = this.sites[0].key;
      }
    } catch (err) {
      // keep showing the last good state; note the hiccup
      this.connNote = err instanceof Error ? err.message : String(err);
    }
    this.render();
  }

  render(): void {
    this.el('site-list').innerHTML = this.sites
      .map((site, i) => siteCard(site, i + 1, site.key === this.selectedKey))
      .join('');
    this.el('question-list').innerHTML = this.questions.map(questionItem).join('');
    this.el('answer-list').innerHTML = this.answers.map(answerRow).join('');
    this.el('defect-list').innerHTML = this.defects.map(defectRow).join('');
    this.el('timing').innerHTML = this.timing ? timingView(this.timing) : '';
    this.el('overwrite-slot').innerHTML = this.overwrite
      ? overwritePrompt(this.overwrite.questionId, this.overwrite.answer)
      : '';
    this.el('defect-error').textContent = this.defectError;
    this.el('conn-note').textContent = this.connNote;
    this.el('report-pane').textContent = this.report;
    this.renderSource();
    this.renderSiteOptions();
  }

  private renderSource(): void {
    if (!this.source) return;
    this.el('source-path').textContent = this.source.path ?? '';
    this.el('source-gutter').textContent = gutter(this.source.text);
    const marks: MarkedSpan[] = [];
    const selected = this.sites.find((s) => s.key === this.selectedKey);
    for (const item of selected?.evidence ?? []) {
      for (const ev of item.fact?.evidence ?? []) {
        if (ev.span) marks.push({ span: ev.span, cls: `mk-${item.kind}` });
      }
    }
    this.el('source-code').innerHTML = markSpans(this.source.text, marks);
  }

  private renderSiteOptions(): void {
    const select = this.el('defect-site') as HTMLSelectElement;
    const current = select.value;
    const options = ['<option value="">(no linked site)</option>'];
    for (const site of this.sites) {
      options.push(`<option value="${escHtml(site.key)}">${escHtml(site.key)}</option>`);
    }
    select.innerHTML = options.join('');
    select.value = current;
  }

  private onClick(event: Event): void {
    const target = (event.target as HTMLElement).closest('[data-action], .site-card');
    if (!(target instanceof HTMLElement)) return;
    const action = target.dataset.action;
    if (action === 'answer') {
      void this.answer(target.dataset.qid!, target.dataset.answer!, false);
    } else if (action === 'confirm-overwrite') {
      void this.answer(target.dataset.qid!, target.dataset.answer!, true);
    } else if (action === 'cancel-overwrite') {
      this.overwrite = null;
      this.render();
    } else if (action === 'dismiss') {
      void this.dismiss(target.dataset.site!);
    } else if (action === 'log-defect') {
      // the submit handler owns this one
    } else if (target.classList.contains('site-card')) {
      this.selectedKey = target.dataset.key ?? null;
      this.render();
    }
  }

  async answer(questionId: string, value: string, overwrite: boolean): Promise<void> {
    try {
      const payload = await this.api.answer(questionId, value, overwrite);
      this.sites = payload.sites;
      this.questions = payload.questions;
      this.overwrite = null;
      this.render();
      await this.refresh();
    } catch (err) {
      if (err instanceof ApiError && err.code === 'conflict') {
        this.overwrite = { questionId, answer: value };
      } else {
        this.connNote = err instanceof Error ? err.message : String(err);
      }
      this.render();
    }
  }

  async dismiss(siteKey: string): Promise<void> {
    try {
      const payload = await this.api.dismiss(siteKey);
      this.sites = payload.sites;
      this.render();
      await this.refresh();
    } catch (err) {
      this.connNote = err instanceof Error ? err.message : String(err);
      this.render();
    }
  }

  async logDefect(): Promise<void> {
    const input = this.el('defect-desc') as HTMLInputElement;
    const select = this.el('defect-site') as HTMLSelectElement;
    const description = input.value.trim();
    if (!description) {
      // reject locally; the service would 422 this anyway
      this.defectError = 'description must not be empty';
      this.render();
      return;
    }
    try {
      const payload = await this.api.logDefect(description, select.value || undefined);
      this.timing = payload.timing;
      this.defects = [...this.defects, payload.defect];
      this.defectError = '';
      input.value = '';
      this.render();
      await this.refresh();
    } catch (err) {
      this.connNote = err instanceof Error ? err.message : String(err);
      this.render();
    }
  }
}
